//! Online variance minimisation over the unit sphere and over the simplex.

use adaptive_oco::bench::streams::substream;
use adaptive_oco::spectral::{var_simplex_params, var_unit_params, VarSimplexState, VarUnitState};
use adaptive_oco::{Matrix, Vector};
use rand::Rng;

fn covariance<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let v = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).normalize();
    &v * v.transpose()
}

fn main() -> adaptive_oco::Result<()> {
    let (n, horizon) = (4, 500);
    let mut rng = substream(2, "example/variance");
    let (eta, alpha) = var_unit_params(horizon, n);
    let mut unit = VarUnitState::new(n, eta, alpha)?;
    let params = var_simplex_params(horizon, n, horizon as f64)?;
    let mut simplex = VarSimplexState::new(n, params.eta, params.alpha)?;
    let (mut unit_loss, mut simplex_loss) = (0.0, 0.0);
    for _ in 0..horizon {
        let c = covariance(n, &mut rng);
        unit_loss += unit.var_unit_round(&c, &mut rng)?.expected_loss;
        simplex_loss += simplex.var_simplex_round(&c)?;
    }
    println!("unit sphere (eta {eta:.4}): expected loss {unit_loss:.2}");
    println!("simplex (eta {:.4}): loss {simplex_loss:.2}, weights {:.3?}", params.eta, simplex.weights());
    Ok(())
}
