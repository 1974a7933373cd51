//! Initial graphs `u₀` and their ingestion into dual potentials on the grid.
//!
//! Builtin graphs are transformed exactly: for each dual node `ξ` the
//! maximiser of `x·ξ - u₀(x)` solves `∇u₀(x) = ξ`, which damped Newton
//! finds to round-off. The discrete sup in [`crate::dualgeo`] remains the
//! route for sampled data.

use crate::dualgeo::w_star;
use crate::error::{Error, Result};
use crate::grid::{PolarGrid, ScalarField};
use crate::linalg::Sym2;
use std::sync::Arc;

/// A smooth entire spacelike graph over `ℝ²`.
pub trait PrimalGraph: Send + Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    fn hessian(&self, x: [f64; 2]) -> Sym2;

    /// Closed-form Legendre transform, when one is known.
    fn dual(&self, _xi: [f64; 2]) -> Option<f64> {
        None
    }

    /// True when the graph depends on `|x|` only.
    fn is_radial(&self) -> bool {
        false
    }
}

/// `u(x) = √(|x|² + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperboloid {
    pub c: f64,
}

impl PrimalGraph for Hyperboloid {
    fn value(&self, x: [f64; 2]) -> f64 {
        (x[0] * x[0] + x[1] * x[1] + self.c).sqrt()
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let u = self.value(x);
        [x[0] / u, x[1] / u]
    }

    fn hessian(&self, x: [f64; 2]) -> Sym2 {
        let u = self.value(x);
        let g = self.gradient(x);
        Sym2::new((1.0 - g[0] * g[0]) / u, -g[0] * g[1] / u, (1.0 - g[1] * g[1]) / u)
    }

    fn dual(&self, xi: [f64; 2]) -> Option<f64> {
        Some(-self.c.sqrt() * w_star(xi))
    }

    fn is_radial(&self) -> bool {
        true
    }
}

/// `u(x) = √(|x|² + c(x))` with
/// `c(x) = C₀ + (C₁ - C₀)(0.5 + 0.3 e^{-|x - x_c|²})`, which lies strictly
/// between the hyperboloids of `C₀` and `C₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichedBump {
    pub c0: f64,
    pub c1: f64,
    pub center: [f64; 2],
}

impl SandwichedBump {
    pub fn new(c0: f64, c1: f64) -> Self {
        SandwichedBump { c0, c1, center: [0.0, 0.0] }
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    /// `c`, `∇c`, `D²c`.
    fn profile(&self, x: [f64; 2]) -> (f64, [f64; 2], Sym2) {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let amp = 0.3 * (self.c1 - self.c0) * (-(d[0] * d[0] + d[1] * d[1])).exp();
        let c = self.c0 + 0.5 * (self.c1 - self.c0) + amp;
        let grad = [-2.0 * d[0] * amp, -2.0 * d[1] * amp];
        let hess = Sym2::new(
            amp * (4.0 * d[0] * d[0] - 2.0),
            amp * 4.0 * d[0] * d[1],
            amp * (4.0 * d[1] * d[1] - 2.0),
        );
        (c, grad, hess)
    }
}

impl PrimalGraph for SandwichedBump {
    fn value(&self, x: [f64; 2]) -> f64 {
        (x[0] * x[0] + x[1] * x[1] + self.profile(x).0).sqrt()
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let (c, dc, _) = self.profile(x);
        let u = (x[0] * x[0] + x[1] * x[1] + c).sqrt();
        [(x[0] + 0.5 * dc[0]) / u, (x[1] + 0.5 * dc[1]) / u]
    }

    fn hessian(&self, x: [f64; 2]) -> Sym2 {
        let (c, dc, hc) = self.profile(x);
        let u = (x[0] * x[0] + x[1] * x[1] + c).sqrt();
        let g = [(x[0] + 0.5 * dc[0]) / u, (x[1] + 0.5 * dc[1]) / u];
        Sym2::new(
            (1.0 + 0.5 * hc.xx) / u - g[0] * g[0] / u,
            0.5 * hc.xy / u - g[0] * g[1] / u,
            (1.0 + 0.5 * hc.yy) / u - g[1] * g[1] / u,
        )
    }

    fn is_radial(&self) -> bool {
        self.center == [0.0, 0.0]
    }
}

/// Legendre transform of `graph` at `ξ` by damped Newton on `∇u(x) = ξ`.
pub fn dual_at(graph: &dyn PrimalGraph, xi: [f64; 2]) -> Result<f64> {
    if let Some(v) = graph.dual(xi) {
        return Ok(v);
    }
    let w = w_star(xi);
    if !(w > 0.0) {
        return Err(Error::OutsideBall { norm: xi[0].hypot(xi[1]) });
    }
    let u0 = graph.value([0.0, 0.0]);
    let mut x = [xi[0] * u0 / w, xi[1] * u0 / w];
    let residual = |x: [f64; 2]| {
        let g = graph.gradient(x);
        [g[0] - xi[0], g[1] - xi[1]]
    };
    let mut r = residual(x);
    let mut norm = r[0].hypot(r[1]);
    for _ in 0..200 {
        if norm <= 1e-15 {
            break;
        }
        let h = graph.hessian(x);
        let det = h.det();
        if !(det > 0.0) {
            return Err(Error::Ingestion(format!(
                "graph Hessian not positive definite at x = ({:.6}, {:.6})",
                x[0], x[1]
            )));
        }
        let dx = [-(h.yy * r[0] - h.xy * r[1]) / det, -(h.xx * r[1] - h.xy * r[0]) / det];
        let mut s = 1.0;
        loop {
            let xn = [x[0] + s * dx[0], x[1] + s * dx[1]];
            let rn = residual(xn);
            let nn = rn[0].hypot(rn[1]);
            if nn < norm || (nn == norm && norm <= 1e-15) {
                x = xn;
                r = rn;
                norm = nn;
                break;
            }
            s *= 0.5;
            if s < 1e-12 {
                // No further decrease is representable: accept if already
                // at round-off.
                if norm <= 1e-12 {
                    return Ok(x[0] * xi[0] + x[1] * xi[1] - graph.value(x));
                }
                return Err(Error::Ingestion(format!(
                    "Newton stalled at ξ = ({:.6}, {:.6}) with residual {norm:e}",
                    xi[0], xi[1]
                )));
            }
        }
    }
    if norm > 1e-12 {
        return Err(Error::Ingestion(format!(
            "Newton did not converge at ξ = ({:.6}, {:.6}), residual {norm:e}",
            xi[0], xi[1]
        )));
    }
    Ok(x[0] * xi[0] + x[1] * xi[1] - graph.value(x))
}

/// Dual potential of `graph` at every node and on the ghost ring. Radial
/// graphs are transformed once per ring so the result is exactly
/// rotation invariant.
pub fn ingest(graph: &dyn PrimalGraph, grid: Arc<PolarGrid>) -> Result<ScalarField> {
    if graph.is_radial() {
        let mut rings = Vec::with_capacity(grid.n_rho() + 1);
        for &rho in grid.rho_nodes().iter().chain(std::iter::once(&grid.r())) {
            rings.push(dual_at(graph, [rho, 0.0])?);
        }
        let nt = grid.n_theta();
        let ghost = vec![rings[grid.n_rho()]; nt];
        let values = rings[..grid.n_rho()]
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, nt))
            .collect();
        return ScalarField::new(grid, values, Some(ghost));
    }
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.n_rho() {
        for j in 0..grid.n_theta() {
            values.push(dual_at(graph, grid.xi(i, j))?);
        }
    }
    let ghost = (0..grid.n_theta())
        .map(|j| dual_at(graph, grid.ghost_xi(j)))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(grid, values, Some(ghost))
}

/// Radial transform at the given radii.
pub fn ingest_radial(graph: &dyn PrimalGraph, radii: &[f64]) -> Result<Vec<f64>> {
    radii.iter().map(|&rho| dual_at(graph, [rho, 0.0])).collect()
}

/// Number of nodes (ghost ring included) where the dual sandwich
/// `-√C₁ w* < u* < -√C₀ w*` fails.
pub fn dual_sandwich_violations(field: &ScalarField, c0: f64, c1: f64) -> usize {
    let g = &field.grid;
    let (a, b) = (c0.sqrt(), c1.sqrt());
    let bad = |u: f64, w: f64| !(-b * w < u && u < -a * w);
    let mut count = 0;
    for i in 0..g.n_rho() {
        let rho = g.rho_nodes()[i];
        let w = (1.0 - rho * rho).sqrt();
        count += (0..g.n_theta()).filter(|&j| bad(field.at(i, j), w)).count();
    }
    if let Some(ghost) = &field.ghost {
        let w = (1.0 - g.r() * g.r()).sqrt();
        count += ghost.iter().filter(|&&u| bad(u, w)).count();
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualgeo::{dual_curvatures, DualState};
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Transform by brute-force maximisation on a fine polar sweep around
    /// the Newton answer's neighbourhood, independent of the Newton code.
    fn brute_dual(graph: &dyn PrimalGraph, xi: [f64; 2]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let (mut cx, mut cy, mut span) = (0.0, 0.0, 20.0);
        for _ in 0..30 {
            let (mut bx, mut by) = (cx, cy);
            for a in -20..=20 {
                for b in -20..=20 {
                    let x = [cx + span * a as f64 / 20.0, cy + span * b as f64 / 20.0];
                    let v = x[0] * xi[0] + x[1] * xi[1] - graph.value(x);
                    if v > best {
                        best = v;
                        bx = x[0];
                        by = x[1];
                    }
                }
            }
            cx = bx;
            cy = by;
            span *= 0.3;
        }
        best
    }

    #[test]
    fn hyperboloid_dual_is_closed_form() {
        let h = Hyperboloid { c: 4.0 };
        assert_relative_eq!(dual_at(&h, [0.0, 0.0]).unwrap(), -2.0, epsilon = 1e-15);
        assert_relative_eq!(dual_at(&h, [0.6, 0.0]).unwrap(), -1.6, epsilon = 1e-15);
    }

    #[test]
    fn newton_matches_brute_force() {
        let b = SandwichedBump::new(0.5, 2.0).with_center([0.3, -0.2]);
        for xi in [[0.0, 0.0], [0.5, 0.1], [-0.2, 0.85], [0.0, -0.9]] {
            let n = dual_at(&b, xi).unwrap();
            assert_relative_eq!(n, brute_dual(&b, xi), epsilon = 1e-9);
        }
    }

    #[test]
    fn newton_without_closed_form_on_hyperboloid() {
        struct Plain(Hyperboloid);
        impl PrimalGraph for Plain {
            fn value(&self, x: [f64; 2]) -> f64 {
                self.0.value(x)
            }
            fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
                self.0.gradient(x)
            }
            fn hessian(&self, x: [f64; 2]) -> Sym2 {
                self.0.hessian(x)
            }
        }
        let p = Plain(Hyperboloid { c: 2.0 });
        for xi in [[0.1, 0.2], [0.89, 0.0], [-0.5, 0.5]] {
            let exact = -(2f64).sqrt() * w_star(xi);
            assert_relative_eq!(dual_at(&p, xi).unwrap(), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let b = SandwichedBump::new(0.5, 2.0).with_center([0.2, 0.1]);
        let x = [0.4, -0.7];
        let h = 1e-5;
        let g = b.gradient(x);
        let hs = b.hessian(x);
        let gx = (b.value([x[0] + h, x[1]]) - b.value([x[0] - h, x[1]])) / (2.0 * h);
        let gy = (b.value([x[0], x[1] + h]) - b.value([x[0], x[1] - h])) / (2.0 * h);
        assert_relative_eq!(g[0], gx, epsilon = 1e-9);
        assert_relative_eq!(g[1], gy, epsilon = 1e-9);
        let hxy = (b.gradient([x[0], x[1] + h])[0] - b.gradient([x[0], x[1] - h])[0]) / (2.0 * h);
        let hyy = (b.gradient([x[0], x[1] + h])[1] - b.gradient([x[0], x[1] - h])[1]) / (2.0 * h);
        assert_relative_eq!(hs.xy, hxy, epsilon = 1e-8);
        assert_relative_eq!(hs.yy, hyy, epsilon = 1e-8);
    }

    #[test]
    fn ingested_bump_is_sandwiched_and_convex() {
        let g = build_grid(0.9, 32, 64).unwrap();
        for center in [[0.0, 0.0], [0.4, 0.2]] {
            let b = SandwichedBump::new(0.5, 2.0).with_center(center);
            let f = ingest(&b, g.clone()).unwrap();
            assert_eq!(dual_sandwich_violations(&f, 0.5, 2.0), 0);
            let k = dual_curvatures(&DualState::new(f, 0.0)).unwrap();
            assert!(k.min_kappa() > 0.0);
        }
    }

    #[test]
    fn radial_ingestion_is_rotation_invariant() {
        let g = build_grid(0.9, 8, 16).unwrap();
        let f = ingest(&SandwichedBump::new(0.5, 2.0), g.clone()).unwrap();
        assert_eq!(f.rotated(3), f);
        let direct = ingest_radial(&SandwichedBump::new(0.5, 2.0), g.rho_nodes()).unwrap();
        for i in 0..g.n_rho() {
            assert_eq!(f.at(i, 5), direct[i]);
        }
    }

    #[test]
    fn boundary_limit_is_controlled() {
        let g = build_grid(0.99, 8, 16).unwrap();
        let f = ingest(&SandwichedBump::new(0.5, 2.0), g.clone()).unwrap();
        let w = (1.0 - 0.99f64 * 0.99).sqrt();
        for &u in f.ghost.as_ref().unwrap() {
            assert!(u.abs() <= 2f64.sqrt() * w);
        }
    }

    proptest! {
        #[test]
        fn bump_lies_between_hyperboloids(x in -5.0f64..5.0, y in -5.0f64..5.0, cx in -1.0f64..1.0) {
            let b = SandwichedBump::new(0.25, 4.0).with_center([cx, 0.0]);
            let u = b.value([x, y]);
            let (lo, hi) = (Hyperboloid { c: 0.25 }, Hyperboloid { c: 4.0 });
            prop_assert!(lo.value([x, y]) < u);
            prop_assert!(u < hi.value([x, y]));
            let gr = b.gradient([x, y]);
            prop_assert!(gr[0].hypot(gr[1]) < 1.0);
        }
    }
}
