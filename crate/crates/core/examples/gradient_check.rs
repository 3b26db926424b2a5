//! Compares backpropagation-through-time gradients with central finite
//! differences on a tiny random network.

use conseg::bilstm::{loss, loss_and_grad, BilstmParams, ClassWeights, NetworkShape};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> conseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shape = NetworkShape { input_size: 5, hidden_size: 4, num_layers: 2 };
    let params = BilstmParams::init(shape, &mut rng)?;
    let seq = Array2::from_shape_fn((8, 5), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<u8> = (0..8).map(|t| u8::from(t % 3 == 0)).collect();
    // unit weights keep J near 1; a central difference carries rounding noise
    // of roughly eps * |J| / h, which heavier weights would inflate
    let weights = ClassWeights::uniform();

    let (j, grads) = loss_and_grad(&params, seq.view(), &labels, weights)?;
    println!("loss {j:.6}");
    let h = 1e-5;
    let names = params.tensor_names();
    for (t, name) in names.iter().enumerate() {
        let analytic = grads.tensors()[t];
        let mut worst: f64 = 0.0;
        for k in 0..analytic.len() {
            let mut plus = params.clone();
            plus.tensors_mut()[t][k] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][k] -= h;
            let numeric = (loss(&plus, seq.view(), &labels, weights)? - loss(&minus, seq.view(), &labels, weights)?) / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
        }
        println!("{name:<16} {:>4} values, max relative error {worst:.1e}", analytic.len());
    }
    Ok(())
}
