//! The small dense-network engine on its own: build, train with Adam and
//! early stopping, predict, and round-trip through JSON.
//!
//! `cargo run --example neural_net`

use ndarray::Array2;

use hierids::nn::{argmax, fit, one_hot, Activation, LayerSpec, Loss, MlpModel, TrainConfig};

fn main() -> hierids::Result<()> {
    run()
}

pub fn run() -> hierids::Result<()> {
    // XOR-style quadrants: not linearly separable
    let points: Vec<[f64; 2]> = (0..400)
        .map(|i| {
            let a = ((i * 37) % 200) as f64 / 100.0 - 1.0;
            let b = ((i * 91) % 200) as f64 / 100.0 - 1.0;
            [a, b]
        })
        .collect();
    let labels: Vec<usize> = points
        .iter()
        .map(|p| usize::from((p[0] > 0.0) != (p[1] > 0.0)))
        .collect();
    let x = Array2::from_shape_fn((points.len(), 2), |(i, j)| points[i][j]);
    let y = one_hot(&labels, 2);

    let specs = [
        LayerSpec::dense(2, 16, Activation::Relu),
        LayerSpec::dense(16, 2, Activation::Softmax),
    ];
    let cfg = TrainConfig {
        loss: Loss::CrossEntropy,
        max_epochs: 150,
        learning_rate: 0.01,
        seed: 3,
        ..TrainConfig::default()
    };
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    let init = MlpModel::new(&specs, &mut rng)?;
    let (model, history) = fit(&init, &x, &y, &x, &y, &cfg)?;
    println!(
        "{} epochs, best validation loss {:.4}",
        history.epochs(),
        history.best_val_loss()
    );

    let probs = model.predict(&x)?;
    let correct = probs
        .rows()
        .into_iter()
        .zip(&labels)
        .filter(|(row, &l)| argmax(row.as_slice().unwrap()) == l)
        .count();
    println!("training accuracy {:.3}", correct as f64 / labels.len() as f64);

    let copy = MlpModel::from_json(&model.to_json()?)?;
    assert_eq!(copy.predict(&x)?, probs);
    println!("{} parameters, JSON round trip exact", model.parameter_count());
    Ok(())
}
