use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const PRODUCTION_MEAN: f64 = 5.0;
pub const PRODUCTION_SD: f64 = 1.25;
pub const PRODUCTION_RANGE: (f64, f64) = (0.0, 10.0);

/// Uniform on `(0, u]`.
fn below<R: Rng + ?Sized>(u: f64, rng: &mut R) -> f64 {
    u * (1.0 - rng.random::<f64>())
}

/// `n` draws from Normal(5, 1.25) truncated to [0, 10] by rejection.
pub fn sample_production<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(PRODUCTION_MEAN, PRODUCTION_SD).expect("valid normal");
    let (lo, hi) = PRODUCTION_RANGE;
    (0..n)
        .map(|_| loop {
            let v = normal.sample(rng);
            if (lo..=hi).contains(&v) {
                break v;
            }
        })
        .collect()
}

/// Quadratic parameters whose corner `(b_1, m_1)` sits exactly on the
/// admissibility boundary for `lambda_dagger`; the other agents are drawn
/// below it. Returns `(b, m)`.
pub fn sample_quadratic_params<R: Rng + ?Sized>(
    n: usize,
    capacity: f64,
    lambda_dagger: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let share = capacity / n as f64;
    let m1 = loop {
        let m = rng.random_range(share..=100.0 * share);
        if m > share {
            break m;
        }
    };
    let nf = n as f64;
    let b1 = nf * lambda_dagger / (nf * m1 - capacity);
    let mut b = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    b.push(b1);
    m.push(m1);
    for _ in 1..n {
        b.push(below(b1, rng));
        m.push(below(m1, rng));
    }
    (b, m)
}

/// Piecewise-linear parameters with `beta_1 = lambda_dagger` and
/// `phi_1 ~ U[C/n, 10 C/n]`. Returns `(beta, phi)`.
pub fn sample_pwl_params<R: Rng + ?Sized>(
    n: usize,
    capacity: f64,
    lambda_dagger: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let share = capacity / n as f64;
    let phi1 = rng.random_range(share..=10.0 * share);
    let mut beta = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    beta.push(lambda_dagger);
    phi.push(phi1);
    for _ in 1..n {
        beta.push(below(lambda_dagger, rng));
        phi.push(below(phi1, rng));
    }
    (beta, phi)
}
