//! Equal-weight Gaussian mixtures fitted to the points of one object.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point3;
use crate::{Error, Result};

/// Covariance floor added to every fitted covariance diagonal, in m².
pub const DEFAULT_REG_COVAR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams {
    pub components: usize,
    pub max_iter: usize,
    /// Convergence threshold on the change of the mean per-point log-likelihood.
    pub tol: f64,
    pub reg_covar: f64,
    pub seed: u64,
    /// Independent k-means++ initializations; the best final fit wins.
    pub restarts: usize,
}

impl Default for GmmParams {
    fn default() -> Self {
        Self {
            components: 5,
            max_iter: 100,
            tol: 1e-6,
            reg_covar: DEFAULT_REG_COVAR,
            seed: 0,
            restarts: 4,
        }
    }
}

/// 3D mixture with uniform weights `1/C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm3 {
    pub means: Vec<Vector3<f64>>,
    pub covariances: Vec<Matrix3<f64>>,
}

/// 2D mixture with uniform weights, the x-y marginal of a [`Gmm3`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm2 {
    pub means: Vec<Vector2<f64>>,
    pub covariances: Vec<Matrix2<f64>>,
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: Gmm3,
    /// Total log-likelihood after initialization and after every accepted
    /// EM iteration; non-decreasing.
    pub log_likelihood: Vec<f64>,
}

impl GmmFit {
    pub fn final_log_likelihood(&self) -> f64 {
        self.log_likelihood.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

impl Gmm3 {
    pub fn components(&self) -> usize {
        self.means.len()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.means.len() as f64
    }

    pub fn log_density(&self, p: &Vector3<f64>) -> f64 {
        let comps = Components3::new(self);
        comps.log_density(p)
    }

    /// Total log-likelihood of `points` under the mixture.
    pub fn log_likelihood(&self, points: &[Vector3<f64>]) -> f64 {
        let comps = Components3::new(self);
        points.iter().map(|p| comps.log_density(p)).sum()
    }

    /// Marginal on the x-y plane: drop z from the means and keep the top-left
    /// 2x2 block of each covariance.
    pub fn project_xy(&self) -> Gmm2 {
        Gmm2 {
            means: self.means.iter().map(|m| Vector2::new(m.x, m.y)).collect(),
            covariances: self
                .covariances
                .iter()
                .map(|c| c.fixed_view::<2, 2>(0, 0).into_owned())
                .collect(),
        }
    }
}

pub fn project_gmm(g: &Gmm3) -> Gmm2 {
    g.project_xy()
}

impl Gmm2 {
    pub fn components(&self) -> usize {
        self.means.len()
    }

    /// Precomputed evaluator for repeated log-density queries.
    pub fn evaluator(&self) -> Gmm2Evaluator {
        let log_c = (self.means.len() as f64).ln();
        let comps = self
            .means
            .iter()
            .zip(&self.covariances)
            .map(|(m, c)| {
                let inv = c.try_inverse().unwrap_or_else(Matrix2::identity);
                let log_norm = -(2.0 * PI).ln() - 0.5 * c.determinant().max(f64::MIN_POSITIVE).ln();
                (*m, inv, log_norm - log_c)
            })
            .collect();
        Gmm2Evaluator { comps }
    }
}

#[derive(Debug, Clone)]
pub struct Gmm2Evaluator {
    comps: Vec<(Vector2<f64>, Matrix2<f64>, f64)>,
}

impl Gmm2Evaluator {
    /// `log( (1/C) Σ_c N(p | μ_c, Σ_c) )`.
    pub fn log_density(&self, p: &Vector2<f64>) -> f64 {
        log_sum_exp(self.comps.iter().map(|(m, inv, k)| {
            let d = p - m;
            k - 0.5 * d.dot(&(inv * d))
        }))
    }
}

struct Components3 {
    // mean, lower Cholesky factor, log of (weight × normalizer)
    comps: Vec<(Vector3<f64>, Matrix3<f64>, f64)>,
}

impl Components3 {
    fn new(g: &Gmm3) -> Self {
        let log_w = -(g.means.len() as f64).ln();
        let comps = g
            .means
            .iter()
            .zip(&g.covariances)
            .map(|(m, c)| {
                let l = Cholesky::new(*c)
                    .map(|ch| ch.l())
                    .unwrap_or_else(|| Matrix3::identity() * DEFAULT_REG_COVAR.sqrt());
                let log_det = 2.0 * (0..3).map(|i| l[(i, i)].ln()).sum::<f64>();
                let k = log_w - 1.5 * (2.0 * PI).ln() - 0.5 * log_det;
                (*m, l, k)
            })
            .collect();
        Self { comps }
    }

    fn component_log(&self, c: usize, p: &Vector3<f64>) -> f64 {
        let (m, l, k) = &self.comps[c];
        let d = p - m;
        let z = l.solve_lower_triangular(&d).unwrap_or(d);
        k - 0.5 * z.norm_squared()
    }

    fn log_density(&self, p: &Vector3<f64>) -> f64 {
        log_sum_exp((0..self.comps.len()).map(|c| self.component_log(c, p)))
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Number of components actually fitted to `n` points when `requested` were asked for.
pub fn effective_components(n: usize, requested: usize) -> usize {
    let requested = requested.max(1);
    if n < 3 * requested {
        (n / 3).max(1)
    } else {
        requested
    }
}

pub fn fit_gmm(points: &[Point3], params: &GmmParams) -> Result<Gmm3> {
    fit_gmm_traced(points, params).map(|f| f.model)
}

/// Expectation-maximization with weights pinned to `1/C`.
///
/// Each restart seeds means by k-means++ from one stream keyed by
/// `params.seed`, starts every component at the sample covariance, and stops
/// on convergence, on `max_iter`, or when an update would lower the
/// log-likelihood (the update is then discarded). The restart with the
/// highest final log-likelihood is returned, earliest on ties.
pub fn fit_gmm_traced(points: &[Point3], params: &GmmParams) -> Result<GmmFit> {
    if points.is_empty() {
        return Err(Error::Empty("cannot fit a mixture to zero points"));
    }
    let data: Vec<Vector3<f64>> = points.iter().map(|p| p.coords).collect();
    let n = data.len();
    let k = effective_components(n, params.components);
    let eps = Matrix3::identity() * params.reg_covar;

    let mean = data.iter().sum::<Vector3<f64>>() / n as f64;
    let global_cov = data
        .iter()
        .map(|p| (p - mean) * (p - mean).transpose())
        .sum::<Matrix3<f64>>()
        / n as f64
        + eps;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let restarts = if k == 1 { 1 } else { params.restarts.max(1) };
    let mut best: Option<GmmFit> = None;
    for _ in 0..restarts {
        let mut model = Gmm3 {
            means: kmeans_pp(&data, k, &mut rng),
            covariances: vec![global_cov; k],
        };
        if k == 1 {
            model.means[0] = mean;
        }
        let fit = run_em(model, &data, &eps, params);
        let better = match &best {
            None => true,
            Some(b) => fit.final_log_likelihood() > b.final_log_likelihood(),
        };
        if better {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn run_em(mut model: Gmm3, data: &[Vector3<f64>], eps: &Matrix3<f64>, params: &GmmParams) -> GmmFit {
    let n = data.len();
    let k = model.components();
    let mut resp = vec![0.0; n * k];
    let mut ll = e_step(&model, data, &mut resp);
    let mut trace = vec![ll];
    for _ in 0..params.max_iter {
        let candidate = m_step(&model, data, &resp, eps);
        let mut next_resp = vec![0.0; n * k];
        let next_ll = e_step(&candidate, data, &mut next_resp);
        if !next_ll.is_finite() || next_ll < ll - 1e-9 {
            break;
        }
        let gain = (next_ll - ll) / n as f64;
        model = candidate;
        resp = next_resp;
        ll = next_ll;
        trace.push(ll);
        if gain < params.tol {
            break;
        }
    }
    GmmFit {
        model,
        log_likelihood: trace,
    }
}

fn kmeans_pp(data: &[Vector3<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vector3<f64>> {
    let mut centers = vec![data[rng.random_range(0..data.len())]];
    let mut d2: Vec<f64> = data.iter().map(|p| (p - centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = data.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..data.len())
        };
        let c = data[pick];
        for (d, p) in d2.iter_mut().zip(data) {
            *d = d.min((p - c).norm_squared());
        }
        centers.push(c);
    }
    centers
}

/// Fills responsibilities (row-major, point × component) and returns the
/// total log-likelihood.
fn e_step(model: &Gmm3, data: &[Vector3<f64>], resp: &mut [f64]) -> f64 {
    let comps = Components3::new(model);
    let k = model.components();
    let mut ll = 0.0;
    for (i, p) in data.iter().enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        for (c, r) in row.iter_mut().enumerate() {
            *r = comps.component_log(c, p);
        }
        let lse = log_sum_exp(row.iter().copied());
        for r in row.iter_mut() {
            *r = (*r - lse).exp();
        }
        ll += lse;
    }
    ll
}

fn m_step(model: &Gmm3, data: &[Vector3<f64>], resp: &[f64], eps: &Matrix3<f64>) -> Gmm3 {
    let k = model.components();
    let mut means = model.means.clone();
    let mut covariances = model.covariances.clone();
    for c in 0..k {
        let weight: f64 = (0..data.len()).map(|i| resp[i * k + c]).sum();
        if weight < 1e-10 {
            continue;
        }
        let mu = data
            .iter()
            .enumerate()
            .map(|(i, p)| p * resp[i * k + c])
            .sum::<Vector3<f64>>()
            / weight;
        let cov = data
            .iter()
            .enumerate()
            .map(|(i, p)| (p - mu) * (p - mu).transpose() * resp[i * k + c])
            .sum::<Matrix3<f64>>()
            / weight;
        means[c] = mu;
        covariances[c] = 0.5 * (cov + cov.transpose()) + eps;
    }
    Gmm3 { means, covariances }
}
