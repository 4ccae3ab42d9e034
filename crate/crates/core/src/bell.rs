//! Entanglement witnesses for a mode pair: the EPR variance and a CHSH
//! combination of displaced-parity correlations.
//!
//! For a two-mode state the displaced parity correlation is
//! `E(alpha, beta) = (pi/2)^2 W(alpha, beta)`, read off the normalized
//! Wigner function at the phase-space point `(alpha, beta)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, WignerFunction};

fn require_pair(state: &GaussianState) -> Result<()> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: state.n_modes(),
        });
    }
    Ok(())
}

/// `Var(x_1 - x_2) + Var(p_1 + p_2)`. Separable states give at least 1.
pub fn duan_epr(state: &GaussianState) -> Result<f64> {
    require_pair(state)?;
    let s = state.covariance();
    let vx = s[(0, 0)] + s[(2, 2)] - 2.0 * s[(0, 2)];
    let vp = s[(1, 1)] + s[(3, 3)] + 2.0 * s[(1, 3)];
    Ok(vx + vp)
}

/// Party A tests at displacements `{0, a}`, party B at `{0, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting {
    pub a: Complex64,
    pub b: Complex64,
}

impl ChshSetting {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let s = Self { a, b };
        if !s.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "CHSH displacements must be finite".into(),
            ));
        }
        Ok(s)
    }

    fn to_array(self) -> [f64; 4] {
        [self.a.re, self.a.im, self.b.re, self.b.im]
    }

    fn from_array(v: [f64; 4]) -> Self {
        Self {
            a: Complex64::new(v[0], v[1]),
            b: Complex64::new(v[2], v[3]),
        }
    }
}

/// Evaluator that reuses one Wigner precision matrix across settings.
#[derive(Debug, Clone)]
pub struct ChshEvaluator {
    wigner: WignerFunction,
}

impl ChshEvaluator {
    pub fn new(state: &GaussianState) -> Result<Self> {
        require_pair(state)?;
        Ok(Self {
            wigner: WignerFunction::new(state)?,
        })
    }

    /// `E(alpha, beta) = (pi/2)^2 W(alpha, beta)`.
    pub fn correlation(&self, alpha: Complex64, beta: Complex64) -> f64 {
        let w = self
            .wigner
            .eval(&[alpha.re, alpha.im, beta.re, beta.im])
            .expect("two-mode point");
        (PI / 2.0).powi(2) * w
    }

    /// `E(0,0) + E(a,0) + E(0,b) - E(a,b)`.
    pub fn chsh(&self, setting: &ChshSetting) -> f64 {
        let z = Complex64::new(0.0, 0.0);
        self.correlation(z, z) + self.correlation(setting.a, z) + self.correlation(z, setting.b)
            - self.correlation(setting.a, setting.b)
    }
}

pub fn chsh_parity(state: &GaussianState, setting: &ChshSetting) -> Result<f64> {
    Ok(ChshEvaluator::new(state)?.chsh(setting))
}

/// Grid plus local search over the four real setting coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSearch {
    /// Points per coordinate on the coarse grid over `[-radius, radius]`.
    pub grid_points: usize,
    pub radius: f64,
    /// Extra local searches from uniformly random starts.
    pub restarts: usize,
    pub seed: u64,
    /// Local search stops once the step falls below this.
    pub tolerance: f64,
}

impl Default for ChshSearch {
    fn default() -> Self {
        Self {
            grid_points: 9,
            radius: 1.0,
            restarts: 8,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshOptimum {
    pub value: f64,
    pub setting: ChshSetting,
    /// Best value seen on the coarse grid before local refinement.
    pub grid_value: f64,
    pub evaluations: u64,
}

fn pattern_search(
    f: &impl Fn([f64; 4]) -> f64,
    start: [f64; 4],
    step: f64,
    tol: f64,
    evals: &mut u64,
) -> ([f64; 4], f64) {
    let mut x = start;
    let mut fx = f(x);
    *evals += 1;
    let mut h = step;
    while h > tol {
        let mut improved = false;
        for i in 0..4 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * h;
                let fy = f(y);
                *evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// Maximizes the CHSH value of a two-mode state.
pub fn maximize_chsh(state: &GaussianState, search: &ChshSearch) -> Result<ChshOptimum> {
    if search.grid_points < 2
        || search.radius.is_nan()
        || search.radius <= 0.0
        || search.tolerance.is_nan()
        || search.tolerance <= 0.0
    {
        return Err(Error::InvalidParameter(
            "CHSH search needs grid_points >= 2, radius > 0 and tolerance > 0".into(),
        ));
    }
    let eval = ChshEvaluator::new(state)?;
    let f = |v: [f64; 4]| eval.chsh(&ChshSetting::from_array(v));
    let n = search.grid_points;
    let spacing = 2.0 * search.radius / (n - 1) as f64;
    let coord = |k: usize| -search.radius + spacing * k as f64;

    let mut evaluations = 0u64;
    let mut best = ([0.0; 4], f64::NEG_INFINITY);
    for i in 0..n.pow(4) {
        let v = [
            coord(i % n),
            coord(i / n % n),
            coord(i / n / n % n),
            coord(i / n / n / n),
        ];
        let fv = f(v);
        evaluations += 1;
        if fv > best.1 {
            best = (v, fv);
        }
    }
    let grid_value = best.1;

    let mut starts = vec![best.0];
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.restarts {
        starts.push(std::array::from_fn(|_| {
            rng.random_range(-search.radius..=search.radius)
        }));
    }
    for s in starts {
        let (x, fx) = pattern_search(&f, s, spacing, search.tolerance, &mut evaluations);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(ChshOptimum {
        value: best.1,
        setting: ChshSetting::from_array(best.0),
        grid_value,
        evaluations,
    })
}

/// Largest `|CHSH|` over the coarse grid of `search`.
pub fn chsh_grid_scan(state: &GaussianState, search: &ChshSearch) -> Result<f64> {
    let eval = ChshEvaluator::new(state)?;
    let n = search.grid_points.max(2);
    let spacing = 2.0 * search.radius / (n - 1) as f64;
    let coord = |k: usize| -search.radius + spacing * k as f64;
    Ok((0..n.pow(4))
        .map(|i| {
            let v = [
                coord(i % n),
                coord(i / n % n),
                coord(i / n / n % n),
                coord(i / n / n / n),
            ];
            eval.chsh(&ChshSetting::from_array(v)).abs()
        })
        .fold(0.0, f64::max))
}
