//! Maximum-likelihood cumulative-Gaussian psychometric fits.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// One binary judgement at a stimulus level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub level: f64,
    pub response: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PsychometricDataset {
    pub trials: Vec<Trial>,
}

impl PsychometricDataset {
    pub fn new(trials: Vec<Trial>) -> Self {
        Self { trials }
    }

    pub fn push(&mut self, level: f64, response: bool) {
        self.trials.push(Trial { level, response });
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// `(level, n_yes, n_total)` per distinct level, ascending.
    pub fn binned(&self) -> Vec<(f64, usize, usize)> {
        let mut sorted = self.trials.clone();
        sorted.sort_by(|a, b| a.level.total_cmp(&b.level));
        let mut bins: Vec<(f64, usize, usize)> = Vec::new();
        for t in sorted {
            match bins.last_mut() {
                Some(bin) if bin.0.total_cmp(&t.level) == Ordering::Equal => {
                    bin.1 += t.response as usize;
                    bin.2 += 1;
                }
                _ => bins.push((t.level, t.response as usize, 1)),
            }
        }
        bins
    }
}

/// Whether the modelled response probability rises or falls with level.
///
/// A decreasing curve (e.g. "deformation seen" vs amplitude) is fitted on the
/// complementary response so `sigma` stays positive and `mu` is still the 50%
/// crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsychometricFit {
    /// 50% point, in stimulus units.
    pub mu: f64,
    pub sigma: f64,
    /// Bernoulli log-likelihood at the optimum, in nats.
    pub log_likelihood: f64,
    pub orientation: Orientation,
}

impl PsychometricFit {
    /// Probability of a positive response at `level`, in the dataset's orientation.
    pub fn probability(&self, level: f64) -> f64 {
        let p = normal_cdf((level - self.mu) / self.sigma);
        match self.orientation {
            Orientation::Increasing => p,
            Orientation::Decreasing => 1.0 - p,
        }
    }
}

/// Level at which "deformation seen" reports cross 50%.
pub fn critical_amplitude(fit: &PsychometricFit) -> f64 {
    fit.mu
}

/// Point of subjective equality.
pub fn pse(fit: &PsychometricFit) -> f64 {
    fit.mu
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// `ln Φ(z)`, accurate far into the lower tail.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z > -20.0 {
        normal_cdf(z).ln()
    } else {
        // asymptotic Mills-ratio expansion
        let z2 = z * z;
        -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

fn binned_for(data: &PsychometricDataset, orientation: Orientation) -> Vec<(f64, usize, usize)> {
    let mut bins = data.binned();
    if orientation == Orientation::Decreasing {
        for b in &mut bins {
            b.1 = b.2 - b.1;
        }
    }
    bins
}

fn ll_binned(bins: &[(f64, usize, usize)], mu: f64, sigma: f64) -> f64 {
    bins.iter()
        .map(|&(x, k, n)| {
            let z = (x - mu) / sigma;
            let yes = if k > 0 { k as f64 * log_normal_cdf(z) } else { 0.0 };
            let no = if n > k { (n - k) as f64 * log_normal_cdf(-z) } else { 0.0 };
            yes + no
        })
        .sum()
}

/// Bernoulli log-likelihood of the data under `Φ((level - mu) / sigma)`.
pub fn log_likelihood(data: &PsychometricDataset, orientation: Orientation, mu: f64, sigma: f64) -> f64 {
    ll_binned(&binned_for(data, orientation), mu, sigma)
}

struct Problem {
    bins: Vec<(f64, usize, usize)>,
    log_sigma_bounds: (f64, f64),
}

impl Problem {
    fn new(data: &PsychometricDataset, orientation: Orientation) -> Result<Self> {
        let bins = binned_for(data, orientation);
        if let Some((i, b)) = bins.iter().enumerate().find(|(_, b)| !b.0.is_finite()) {
            return Err(Error::DegenerateData(format!("bin {i} has non-finite level {}", b.0)));
        }
        if bins.len() < 2 {
            return Err(Error::DegenerateData(format!(
                "{} distinct stimulus level(s); need at least 2",
                bins.len()
            )));
        }
        let yes: usize = bins.iter().map(|b| b.1).sum();
        let total: usize = bins.iter().map(|b| b.2).sum();
        if yes == 0 || yes == total {
            return Err(Error::DegenerateData(
                "all responses identical; the 50% point is not identified".into(),
            ));
        }
        let range = bins.last().unwrap().0 - bins[0].0;
        Ok(Self {
            bins,
            log_sigma_bounds: ((range * 1e-3).ln(), (range * 10.0).ln()),
        })
    }

    fn range(&self) -> f64 {
        self.bins.last().unwrap().0 - self.bins[0].0
    }

    fn clamp_log_sigma(&self, s: f64) -> f64 {
        s.clamp(self.log_sigma_bounds.0, self.log_sigma_bounds.1)
    }

    /// Negative log-likelihood over `(mu, ln sigma)`.
    fn cost(&self, p: [f64; 2]) -> f64 {
        let nll = -ll_binned(&self.bins, p[0], self.clamp_log_sigma(p[1]).exp());
        if nll.is_nan() {
            f64::INFINITY
        } else {
            nll
        }
    }

    fn grid_start(&self) -> [f64; 2] {
        const MU_STEPS: usize = 61;
        const SIGMA_STEPS: usize = 31;
        let lo = self.bins[0].0 - 0.25 * self.range();
        let hi = self.bins.last().unwrap().0 + 0.25 * self.range();
        let (sl, sh) = self.log_sigma_bounds;
        let mut best = ([lo, sl], f64::INFINITY);
        for i in 0..MU_STEPS {
            let mu = lo + (hi - lo) * i as f64 / (MU_STEPS - 1) as f64;
            for j in 0..SIGMA_STEPS {
                let ls = sl + (sh - sl) * j as f64 / (SIGMA_STEPS - 1) as f64;
                let c = self.cost([mu, ls]);
                if c < best.1 {
                    best = ([mu, ls], c);
                }
            }
        }
        best.0
    }

    fn refine(&self, start: [f64; 2]) -> [f64; 2] {
        let steps = [self.range() / 20.0, 0.5];
        let mut x = nelder_mead(|p| self.cost(p), start, steps);
        // restart once from the optimum to escape a collapsed simplex
        x = nelder_mead(|p| self.cost(p), x, [steps[0] / 10.0, 0.05]);
        [x[0], self.clamp_log_sigma(x[1])]
    }

    fn finish(&self, x: [f64; 2], orientation: Orientation) -> PsychometricFit {
        let sigma = x[1].exp();
        PsychometricFit {
            mu: x[0],
            sigma,
            log_likelihood: ll_binned(&self.bins, x[0], sigma),
            orientation,
        }
    }
}

/// Maximum-likelihood fit of a two-parameter cumulative Gaussian (no lapse
/// or guess rate). A coarse `(mu, ln sigma)` grid seeds a Nelder-Mead
/// refinement. Trials are binned by level first, so the result does not
/// depend on trial order.
pub fn fit_cumulative_gaussian(
    data: &PsychometricDataset,
    orientation: Orientation,
) -> Result<PsychometricFit> {
    let problem = Problem::new(data, orientation)?;
    let x = problem.refine(problem.grid_start());
    Ok(problem.finish(x, orientation))
}

/// Like [`fit_cumulative_gaussian`] but refines from a caller-supplied
/// `(mu, sigma)` instead of the grid. The result never has a lower
/// likelihood than the start.
pub fn fit_cumulative_gaussian_from(
    data: &PsychometricDataset,
    orientation: Orientation,
    start: (f64, f64),
) -> Result<PsychometricFit> {
    let problem = Problem::new(data, orientation)?;
    if start.1.is_nan() || start.1 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("start sigma {} must be positive", start.1),
        });
    }
    let x0 = [start.0, problem.clamp_log_sigma(start.1.ln())];
    let x = problem.refine(x0);
    let x = if problem.cost(x) <= problem.cost(x0) { x } else { x0 };
    Ok(problem.finish(x, orientation))
}

/// Two-dimensional Nelder-Mead minimizer.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2]) -> [f64; 2] {
    const MAX_ITER: usize = 2000;
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&f);
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..MAX_ITER {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = (0..2)
            .map(|d| (simplex[1][d] - simplex[0][d]).abs().max((simplex[2][d] - simplex[0][d]).abs()))
            .fold(0.0, f64::max);
        if spread <= 1e-12 * (1.0 + values[0].abs()) && size <= 1e-10 {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let reflected = add(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = add(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                add(centroid, reflected, 0.5)
            } else {
                add(centroid, simplex[2], 0.5)
            };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = add(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    simplex[best]
}

/// Draws `trials_per_level` Bernoulli responses at each level with
/// probability `p(level)`. Deterministic in `seed`.
pub fn sample_observer(
    levels: &[f64],
    trials_per_level: usize,
    p: impl Fn(f64) -> f64,
    seed: u64,
) -> PsychometricDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = PsychometricDataset::default();
    for &level in levels {
        let prob = p(level);
        for _ in 0..trials_per_level {
            data.push(level, rng.random::<f64>() < prob);
        }
    }
    data
}
