//! Closed-form solutions, explicit barriers, and a high-resolution radial
//! reference solver used to validate the disk solver.

mod radial;

pub use radial::{radial_run, RadialLaw, RadialOptions, RadialProfile, RadialTrajectory};

use crate::curvfun::CurvatureSpec;
use crate::dualgeo::w_star;
use crate::error::{arg, Error, Result};
use crate::flow::scale_factor;
use crate::grid::ScalarField;
use std::sync::Arc;

/// Dual potential of the expanding hyperboloid,
/// `z*(ξ, t) = -[(1+α)t]^{1/(1+α)} √(1 - |ξ|²)`.
pub fn special_dual(xi: [f64; 2], t: f64, alpha: f64) -> Result<f64> {
    let w = ball_weight(xi)?;
    if !(t >= 0.0) {
        return arg(format!("time {t} must be non-negative"));
    }
    Ok(-((1.0 + alpha) * t).powf(1.0 / (1.0 + alpha)) * w)
}

/// [`special_dual`] at the shifted time `t̃ = t + 1/(1+α)`, which starts
/// from `-√(1 - |ξ|²)` at `t = 0`.
pub fn special_dual_shifted(xi: [f64; 2], t: f64, alpha: f64) -> Result<f64> {
    special_dual(xi, t + 1.0 / (1.0 + alpha), alpha)
}

/// Graph of the expanding hyperboloid, `√(|x|² + [(1+α)t]^{2/(1+α)})`.
pub fn special_primal(x: [f64; 2], t: f64, alpha: f64) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + ((1.0 + alpha) * t).powf(2.0 / (1.0 + alpha))).sqrt()
}

fn ball_weight(xi: [f64; 2]) -> Result<f64> {
    let w = w_star(xi);
    if !(w > 0.0) {
        return Err(Error::OutsideBall { norm: xi[0].hypot(xi[1]) });
    }
    Ok(w)
}

/// The explicit sub- and supersolution pair
/// `u_b = -(a₁+1) S(t) w*` and `u_s = -a₀ S(t) w*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPair {
    pub a0: f64,
    pub a1: f64,
    pub alpha: f64,
}

/// Barrier constants `a₀² = 0.9 min(C₀, 1)` and `a₁² = 1.1 max(C₁, 1)`.
pub fn barrier_pair(c0: f64, c1: f64, alpha: f64) -> Result<BarrierPair> {
    if !(c0 > 0.0 && c0 < c1 && c1.is_finite()) {
        return arg(format!("need 0 < C0 < C1, got C0 = {c0}, C1 = {c1}"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return arg(format!("alpha = {alpha} must be positive"));
    }
    Ok(BarrierPair {
        a0: (0.9 * c0.min(1.0)).sqrt(),
        a1: (1.1 * c1.max(1.0)).sqrt(),
        alpha,
    })
}

impl BarrierPair {
    pub fn lower(&self, xi: [f64; 2], t: f64) -> Result<f64> {
        Ok(-(self.a1 + 1.0) * scale_factor(self.alpha, t) * ball_weight(xi)?)
    }

    pub fn upper(&self, xi: [f64; 2], t: f64) -> Result<f64> {
        Ok(-self.a0 * scale_factor(self.alpha, t) * ball_weight(xi)?)
    }

    /// Both profiles sampled on the nodes of `grid` (ghost ring included).
    pub fn fields(&self, grid: &Arc<crate::grid::PolarGrid>, t: f64) -> (ScalarField, ScalarField) {
        let s = scale_factor(self.alpha, t);
        let lo = -(self.a1 + 1.0) * s;
        let hi = -self.a0 * s;
        (
            ScalarField::from_fn(grid.clone(), |x| lo * w_star(x)),
            ScalarField::from_fn(grid.clone(), |x| hi * w_star(x)),
        )
    }

    /// Residuals `∂_t u + f_*(κ*[u])^{-α} w*` of the lower and upper
    /// profiles at `(ρ, t)`, with `κ*` from the radial reduction of the
    /// profile derivatives. The lower one must be negative and the upper
    /// one positive.
    pub fn residuals(&self, spec: &CurvatureSpec, rho: f64, t: f64) -> Result<(f64, f64)> {
        if !(0.0 < rho && rho < 1.0) {
            return Err(Error::OutsideBall { norm: rho });
        }
        let law = RadialLaw::new(spec)?;
        let alpha = spec.alpha();
        let s = scale_factor(alpha, t);
        let ds = s.powf(-alpha);
        let w = (1.0 - rho * rho).sqrt();
        let residual = |c: f64| {
            // u = -c S w*: u' = c S ρ / w*, u'' = c S / w*³
            let (u1, u2) = (c * s * rho / w, c * s / (w * w * w));
            let kr = w * w * w * u2;
            let kt = w * u1 / rho;
            -c * ds * w + law.value(kr, kt).powf(-alpha) * w
        };
        Ok((residual(self.a1 + 1.0), residual(self.a0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `h ≤ u*` on the circle.
    Lower,
    /// `h ≥ u*` on the circle.
    Upper,
}

/// `h(ξ) = -a √(1 - |ξ|²) + b·ξ + d`, touching `u*` at one node of a ring
/// and lying on one side of it along that ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentBarrier {
    pub a: f64,
    pub b: [f64; 2],
    pub d: f64,
    pub side: Side,
    pub xi_hat: [f64; 2],
    /// Most negative one-sided gap `±(h - u*)` over the ring nodes.
    pub worst_gap: f64,
}

impl TangentBarrier {
    pub fn eval(&self, xi: [f64; 2]) -> f64 {
        -self.a * w_star(xi) + self.b[0] * xi[0] + self.b[1] * xi[1] + self.d
    }
}

const TANGENT_TOL: f64 = 1e-10;

/// Constructs a tangent barrier at node `(ring, angle)` of `field`.
///
/// In the frame where the contact point is `(r̃, 0)`, the tangential slope
/// matches the centred angular difference of `u*`, the radial slope makes
/// `h` touch, and the offset `d` is searched by doubling from the bound
/// that controls the far half of the circle.
pub fn tangent_barrier(field: &ScalarField, ring: usize, angle: usize, a: f64, side: Side) -> Result<TangentBarrier> {
    let g = &field.grid;
    if ring >= g.n_rho() || angle >= g.n_theta() {
        return arg(format!("node ({ring}, {angle}) is outside the grid"));
    }
    let rt = g.rho_nodes()[ring];
    if !(rt > 0.5 && rt < g.r()) {
        return arg(format!("contact radius {rt} must lie in (1/2, r)"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return arg(format!("cap coefficient a = {a} must be positive"));
    }
    let nt = g.n_theta();
    let row: Vec<f64> = (0..nt).map(|j| field.at(ring, j)).collect();
    let u0 = row[angle];
    let wt = (1.0 - rt * rt).sqrt();
    let jp = (angle + 1) % nt;
    let jm = (angle + nt - 1) % nt;
    let b2 = (row[jp] - row[jm]) * g.angular_first_coeff() / rt;
    let sigma = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let th = g.theta_nodes()[angle];
    let (c, s) = (th.cos(), th.sin());
    let build = |d: f64| {
        let off = sigma * d;
        let b1 = (u0 + a * wt - off) / rt;
        let b = [b1 * c - b2 * s, b1 * s + b2 * c];
        let h = TangentBarrier { a, b, d: off, side, xi_hat: [rt * c, rt * s], worst_gap: 0.0 };
        let mut worst = f64::INFINITY;
        for (j, &u) in row.iter().enumerate() {
            if j != angle {
                worst = worst.min(sigma * (h.eval(g.xi(ring, j)) - u));
            }
        }
        TangentBarrier { worst_gap: worst, ..h }
    };
    let scale = row.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = TANGENT_TOL * scale;
    let first = build(0.0);
    if first.worst_gap >= -tol {
        return Ok(first);
    }
    let max_abs = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ang = g.angular_first_coeff();
    let max_slope = (0..nt).fold(0.0f64, |m, j| m.max(((row[(j + 1) % nt] - row[(j + nt - 1) % nt]) * ang).abs()));
    let mut d = (2.0 * a * wt + 2.0 * max_abs + max_slope) / (1.0 - std::f64::consts::FRAC_1_SQRT_2);
    let mut best = first;
    for _ in 0..64 {
        let h = build(d);
        if h.worst_gap >= -tol {
            return Ok(h);
        }
        if h.worst_gap > best.worst_gap {
            best = h;
        }
        d *= 2.0;
    }
    Err(Error::BarrierConstruction { max_violation: -best.worst_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualgeo::{legendre_dual_to_primal, DualState};
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn special_dual_values() {
        assert_relative_eq!(special_dual([0.0, 0.0], 0.5, 1.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(special_dual([0.0, 0.0], 1.5, 1.0).unwrap(), -3f64.sqrt(), epsilon = 1e-15);
        assert!(special_dual([0.999999, 0.0], 1.0, 1.0).unwrap().abs() < 3e-3);
        assert!(matches!(special_dual([1.0, 0.0], 1.0, 1.0), Err(Error::OutsideBall { .. })));
        assert_relative_eq!(special_dual_shifted([0.0, 0.0], 0.0, 2.0).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn special_primal_values() {
        assert_relative_eq!(special_primal([0.0, 0.0], 0.5, 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(special_primal([3.0, 0.0], 0.5, 1.0), 10f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn special_pair_is_a_legendre_pair() {
        let g = build_grid(0.99, 64, 128).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let f = ScalarField::from_fn(g.clone(), |x| special_dual(x, t, 1.0).unwrap());
            let st = DualState::new(f, t);
            let xs = [[0.0, 0.0], [0.3, -0.2], [0.5, 0.5]];
            let u = legendre_dual_to_primal(&st, &xs).unwrap();
            for (x, v) in xs.iter().zip(u) {
                assert_relative_eq!(v, special_primal(*x, t, 1.0), max_relative = 2e-3);
            }
        }
    }

    #[test]
    fn barrier_constants_and_profiles() {
        let p = barrier_pair(0.25, 4.0, 1.0).unwrap();
        assert_relative_eq!(p.a0, 0.225f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.a1, 4.4f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.lower([0.0, 0.0], 0.0).unwrap(), -(p.a1 + 1.0), epsilon = 1e-15);
        assert_relative_eq!(p.upper([0.0, 0.0], 0.0).unwrap(), -p.a0, epsilon = 1e-15);
        let s = 3f64.sqrt();
        assert_relative_eq!(p.upper([0.3, 0.1], 1.0).unwrap(), s * p.upper([0.3, 0.1], 0.0).unwrap(), epsilon = 1e-14);
        assert_relative_eq!(p.lower([0.3, 0.1], 1.0).unwrap(), s * p.lower([0.3, 0.1], 0.0).unwrap(), epsilon = 1e-14);
        assert!(barrier_pair(2.0, 2.0, 1.0).is_err());
        assert!(barrier_pair(3.0, 2.0, 1.0).is_err());
        let q = barrier_pair(1.0, 1.0 + 1e-9, 1.0).unwrap();
        assert!(q.a0 < 1.0 && q.a1 > 1.0);
    }

    #[test]
    fn barriers_are_sub_and_super_solutions() {
        for (n, k, beta, alpha) in [(2, 0, 1.0, 1.0), (2, 1, 0.5, 1.0), (3, 1, 0.5, 2.0), (3, 2, 1.0, 0.5)] {
            let spec = CurvatureSpec::new(n, k, beta, alpha).unwrap();
            let p = barrier_pair(0.5, 2.0, alpha).unwrap();
            for &rho in &[0.05, 0.4, 0.8, 0.95] {
                for &t in &[0.0, 0.3, 1.0, 4.0] {
                    let (lo, hi) = p.residuals(&spec, rho, t).unwrap();
                    assert!(lo < 0.0 && hi > 0.0, "spec {n} {k}: {lo} {hi}");
                }
            }
        }
    }

    #[test]
    fn tangent_barrier_touches_hyperboloid() {
        let g = build_grid(0.9, 32, 64).unwrap();
        let c = 1.7;
        let f = ScalarField::from_radial(g.clone(), |rho| -c * (1.0 - rho * rho).sqrt());
        for side in [Side::Upper, Side::Lower] {
            let h = tangent_barrier(&f, 24, 5, c, side).unwrap();
            assert_eq!(h.d, 0.0);
            for j in 0..g.n_theta() {
                assert_relative_eq!(h.eval(g.xi(24, j)), f.at(24, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tangent_barrier_on_perturbed_state() {
        let g = build_grid(0.9, 32, 64).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| -1.3 * w_star(x) + 0.05 * (x[0] * x[0] * x[1]) + 0.1 * x[0]);
        for (side, sign) in [(Side::Upper, 1.0), (Side::Lower, -1.0)] {
            let h = tangent_barrier(&f, 26, 11, 0.8, side).unwrap();
            let xh = g.xi(26, 11);
            assert!((h.eval(xh) - f.at(26, 11)).abs() < 1e-12);
            for j in 0..g.n_theta() {
                assert!(sign * (h.eval(g.xi(26, j)) - f.at(26, j)) >= -1e-10);
            }
        }
    }

    #[test]
    fn tangent_barrier_validation() {
        let g = build_grid(0.9, 32, 64).unwrap();
        let f = ScalarField::from_radial(g, |rho| -(1.0 - rho * rho).sqrt());
        assert!(tangent_barrier(&f, 24, 0, 0.0, Side::Upper).is_err());
        assert!(tangent_barrier(&f, 3, 0, 1.0, Side::Upper).is_err());
        assert!(tangent_barrier(&f, 24, 64, 1.0, Side::Upper).is_err());
    }

    proptest! {
        #[test]
        fn barrier_order(c0 in 0.05f64..3.0, gap in 0.01f64..5.0, t in 0.0f64..10.0, x in -0.7f64..0.7, y in -0.7f64..0.7) {
            let p = barrier_pair(c0, c0 + gap, 1.0).unwrap();
            prop_assert!(p.a0 > 0.0 && p.a0 < 1.0 && p.a1 > 1.0);
            prop_assert!(p.lower([x, y], t).unwrap() < p.upper([x, y], t).unwrap());
        }
    }
}
