//! Geometric features of the flock used by the weight-mode classifier.
//!
//! All three features are computed over robots and the humans inside the
//! boundary region. The per-robot measure of spread is summarized by its
//! mean and population standard deviation over robots.


#![allow(clippy::needless_range_loop)]
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flock::{AgentId, AgentState, BoundaryRegion};
use crate::vec2::Vec2;

/// Ridge strength used when the cubic normal equations are singular.
pub const CUBIC_RIDGE_LAMBDA: f64 = 1e-8;

pub const FEATURE_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("no agents to compute features over")]
    Empty,
    #[error("agent not found: {0}")]
    UnknownAgent(AgentId),
    #[error("feature is not finite: {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Mean position divided component-wise by the region maxima.
    pub rho: [f64; 2],
    pub sigma_mean: f64,
    pub sigma_std: f64,
    /// Cubic coefficients of y on x, constant term first.
    pub alpha: [f64; 4],
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        [
            self.rho[0],
            self.rho[1],
            self.sigma_mean,
            self.sigma_std,
            self.alpha[0],
            self.alpha[1],
            self.alpha[2],
            self.alpha[3],
        ]
    }

    pub fn from_array(v: [f64; FEATURE_DIM]) -> Self {
        Self {
            rho: [v[0], v[1]],
            sigma_mean: v[2],
            sigma_std: v[3],
            alpha: [v[4], v[5], v[6], v[7]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Mean agent position divided by `(x_max, y_max)`.
pub fn regional_density(
    agents: &[AgentState],
    boundary: &BoundaryRegion,
) -> Result<[f64; 2], FeatureError> {
    if agents.is_empty() {
        return Err(FeatureError::Empty);
    }
    let n = agents.len() as f64;
    let mean = agents.iter().fold(Vec2::ZERO, |acc, a| acc + a.position) / n;
    let rho = [mean.x / boundary.x_max, mean.y / boundary.y_max];
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite("regional density"));
    }
    Ok(rho)
}

/// `(1/n) · ‖Σ_{j≠i} (x_i − x_j)‖` with `n` the total agent count.
pub fn measure_of_spread(agents: &[AgentState], i: AgentId) -> Result<f64, FeatureError> {
    let me = agents
        .iter()
        .find(|a| a.id == i)
        .ok_or(FeatureError::UnknownAgent(i))?;
    let sum = agents
        .iter()
        .filter(|a| a.id != i)
        .fold(Vec2::ZERO, |acc, a| acc + (me.position - a.position));
    Ok(sum.norm() / agents.len() as f64)
}

/// Least-squares cubic `y ≈ α₀ + α₁x + α₂x² + α₃x³` through the agent positions.
///
/// With fewer than four distinct x values the normal equations are singular;
/// the ridge-regularized solution `(XᵀX + λI)⁻¹XᵀY` with
/// λ = [`CUBIC_RIDGE_LAMBDA`] is returned instead, which approximates the
/// minimum-norm least-squares fit.
pub fn best_fit_cubic(agents: &[AgentState]) -> Result<[f64; 4], FeatureError> {
    let points: Vec<Vec2> = agents.iter().map(|a| a.position).collect();
    let alpha = fit_cubic(&points)?;
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite("best fit cubic"));
    }
    Ok(alpha)
}

/// Cubic fit over raw points. See [`best_fit_cubic`].
pub fn fit_cubic(points: &[Vec2]) -> Result<[f64; 4], FeatureError> {
    if points.is_empty() {
        return Err(FeatureError::Empty);
    }
    let groups = group_by_x(points);
    if groups.len() >= 4 {
        Ok(least_squares_qr(points))
    } else {
        Ok(ridge_dual(&groups, CUBIC_RIDGE_LAMBDA))
    }
}

/// Robots' spread values plus the three features, over robots and the humans
/// inside `boundary`.
pub fn build_feature_vector(
    agents: &[AgentState],
    boundary: &BoundaryRegion,
) -> Result<FeatureVector, FeatureError> {
    let detected: Vec<AgentState> = agents
        .iter()
        .filter(|a| a.is_robot() || boundary.contains(a.position))
        .copied()
        .collect();
    if detected.is_empty() {
        return Err(FeatureError::Empty);
    }
    let rho = regional_density(&detected, boundary)?;
    let sigmas = detected
        .iter()
        .filter(|a| a.is_robot())
        .map(|a| measure_of_spread(&detected, a.id))
        .collect::<Result<Vec<_>, _>>()?;
    let (sigma_mean, sigma_std) = mean_and_population_std(&sigmas);
    let alpha = best_fit_cubic(&detected)?;
    Ok(FeatureVector {
        rho,
        sigma_mean,
        sigma_std,
        alpha,
    })
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct XGroup {
    x: f64,
    count: f64,
    mean_y: f64,
}

fn group_by_x(points: &[Vec2]) -> Vec<XGroup> {
    let mut sorted: Vec<Vec2> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut groups: Vec<XGroup> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for p in sorted {
        match groups.last_mut() {
            Some(g) if g.x == p.x => {
                g.count += 1.0;
                *sums.last_mut().unwrap() += p.y;
            }
            _ => {
                groups.push(XGroup {
                    x: p.x,
                    count: 1.0,
                    mean_y: 0.0,
                });
                sums.push(p.y);
            }
        }
    }
    for (g, s) in groups.iter_mut().zip(sums) {
        g.mean_y = s / g.count;
    }
    groups
}

fn monomials(x: f64) -> [f64; 4] {
    [1.0, x, x * x, x * x * x]
}

/// Full-rank least squares by Householder QR of the design matrix.
fn least_squares_qr(points: &[Vec2]) -> [f64; 4] {
    let mut a: Vec<[f64; 4]> = points.iter().map(|p| monomials(p.x)).collect();
    let mut b: Vec<f64> = points.iter().map(|p| p.y).collect();
    let m = a.len();

    for k in 0..4 {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..4 {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vv;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vv;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }

    let mut coef = [0.0; 4];
    for k in (0..4).rev() {
        let tail: f64 = (k + 1..4).map(|j| a[k][j] * coef[j]).sum();
        coef[k] = (b[k] - tail) / a[k][k];
    }
    coef
}

/// Ridge solution through the dual identity
/// `(XᵀX + λI)⁻¹XᵀY = Xᵀ(XXᵀ + λI)⁻¹Y`, over distinct-x groups weighted by
/// multiplicity. The dual system is at most 3×3 and well conditioned.
fn ridge_dual(groups: &[XGroup], lambda: f64) -> [f64; 4] {
    let r = groups.len();
    let rows: Vec<[f64; 4]> = groups
        .iter()
        .map(|g| monomials(g.x).map(|v| v * g.count.sqrt()))
        .collect();
    let mut gram: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let d: f64 = (0..4).map(|k| rows[i][k] * rows[j][k]).sum();
                    if i == j {
                        d + lambda
                    } else {
                        d
                    }
                })
                .collect()
        })
        .collect();
    let mut rhs: Vec<f64> = groups.iter().map(|g| g.count.sqrt() * g.mean_y).collect();
    let c = solve_dense(&mut gram, &mut rhs);
    let mut alpha = [0.0; 4];
    for (row, ci) in rows.iter().zip(c) {
        for k in 0..4 {
            alpha[k] += row[k] * ci;
        }
    }
    alpha
}

/// Gaussian elimination with partial pivoting. `a` must be non-singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / a[k][k];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(id: u32, x: f64, y: f64) -> AgentState {
        AgentState::robot(id, Vec2::new(x, y))
    }

    fn line(points: &[(f64, f64)]) -> Vec<AgentState> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| r(i as u32, x, y))
            .collect()
    }

    #[test]
    fn regional_density_examples() {
        let b = BoundaryRegion::square(10.0).unwrap();
        let rho = regional_density(&line(&[(2.0, 2.0), (4.0, 6.0)]), &b).unwrap();
        assert!((rho[0] - 0.3).abs() < 1e-15 && (rho[1] - 0.4).abs() < 1e-15);
        assert_eq!(regional_density(&line(&[(10.0, 10.0)]), &b).unwrap(), [1.0, 1.0]);
        assert_eq!(regional_density(&line(&[(0.0, 0.0), (0.0, 0.0)]), &b).unwrap(), [0.0, 0.0]);
        assert_eq!(regional_density(&[], &b), Err(FeatureError::Empty));
    }

    #[test]
    fn spread_examples() {
        let sym = line(&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]);
        assert_eq!(measure_of_spread(&sym, AgentId(0)).unwrap(), 0.0);
        let skew = line(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0)]);
        let s = measure_of_spread(&skew, AgentId(0)).unwrap();
        assert!((s - 20f64.sqrt() / 3.0).abs() < 1e-12);
        assert!((s - 1.49071).abs() < 1e-4);
        assert_eq!(measure_of_spread(&line(&[(4.0, 4.0)]), AgentId(0)).unwrap(), 0.0);
        assert_eq!(
            measure_of_spread(&skew, AgentId(5)),
            Err(FeatureError::UnknownAgent(AgentId(5)))
        );
    }

    #[test]
    fn cubic_examples() {
        let close = |a: [f64; 4], b: [f64; 4], tol: f64| {
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
        };
        let flat = best_fit_cubic(&line(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)])).unwrap();
        assert!(close(flat, [1.0, 0.0, 0.0, 0.0], 1e-9), "{flat:?}");
        let slope = best_fit_cubic(&line(&[(0.0, 0.0), (1.0, 2.0), (2.0, 4.0), (3.0, 6.0)])).unwrap();
        assert!(close(slope, [0.0, 2.0, 0.0, 0.0], 1e-9), "{slope:?}");
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let x = f64::from(i);
                (x, 1.0 + x - 0.5 * x.powi(3))
            })
            .collect();
        let cubic = best_fit_cubic(&line(&pts)).unwrap();
        assert!(close(cubic, [1.0, 1.0, 0.0, -0.5], 1e-6), "{cubic:?}");
        assert_eq!(best_fit_cubic(&[]), Err(FeatureError::Empty));
    }

    #[test]
    fn single_point_ridge_solution() {
        // XᵀX = vvᵀ for v = (1, 5, 25, 125); the ridge solution is v·y/(‖v‖² + λ).
        let a = best_fit_cubic(&line(&[(5.0, 5.0)])).unwrap();
        let v = [1.0, 5.0, 25.0, 125.0];
        let nn: f64 = v.iter().map(|x| x * x).sum();
        for k in 0..4 {
            assert!((a[k] - v[k] * 5.0 / (nn + CUBIC_RIDGE_LAMBDA)).abs() < 1e-15);
        }
    }

    #[test]
    fn feature_vector_for_lone_robot() {
        let b = BoundaryRegion::square(10.0).unwrap();
        let f = build_feature_vector(&line(&[(5.0, 5.0)]), &b).unwrap();
        assert_eq!(f.rho, [0.5, 0.5]);
        assert_eq!((f.sigma_mean, f.sigma_std), (0.0, 0.0));
        assert_eq!(f.alpha, best_fit_cubic(&line(&[(5.0, 5.0)])).unwrap());
        assert_eq!(FeatureVector::from_array(f.to_array()), f);
    }

    #[test]
    fn feature_vector_for_robot_line() {
        let b = BoundaryRegion::square(10.0).unwrap();
        let agents = line(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]);
        let f = build_feature_vector(&agents, &b).unwrap();
        // σ: |(−1,0)+(−2,0)|/3 = 1, 0, 1
        assert!((f.sigma_mean - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.sigma_std - (2.0f64 / 9.0).sqrt()).abs() < 1e-12);
        // Three distinct x values: the ridge fit interpolates y = 1 at the
        // sample points but is the minimum-norm interpolant
        // (1,0,0,0) + t·(−6,11,−6,1) with t = 6/194, not the constant.
        let t = 6.0 / 194.0;
        let expected = [1.0 - 6.0 * t, 11.0 * t, -6.0 * t, t];
        for k in 0..4 {
            assert!((f.alpha[k] - expected[k]).abs() < 1e-6, "{:?}", f.alpha);
        }
        for x in [1.0, 2.0, 3.0] {
            let y = f.alpha[0] + f.alpha[1] * x + f.alpha[2] * x * x + f.alpha[3] * x * x * x;
            assert!((y - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn humans_outside_region_are_ignored() {
        let b = BoundaryRegion::square(10.0).unwrap();
        let mut agents = line(&[(5.0, 5.0)]);
        agents.push(AgentState::human(50, Vec2::new(12.0, 5.0)));
        let f = build_feature_vector(&agents, &b).unwrap();
        assert_eq!(f.rho, [0.5, 0.5]);
        agents.push(AgentState::human(51, Vec2::new(5.0, 9.0)));
        let f = build_feature_vector(&agents, &b).unwrap();
        assert_eq!(f.rho, [0.5, 0.7]);
        assert_eq!(build_feature_vector(&[], &b), Err(FeatureError::Empty));
    }
}
