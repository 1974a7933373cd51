//! Radially symmetric reduction of the dual flow, valid in any dimension.
//!
//! For `u*(ξ) = U(|ξ|)` the dual curvatures are `w*³ U''` (radial) and
//! `w* U'/ρ` (tangential, with multiplicity `n - 1`). The profile is stored
//! on the cell-centred radial nodes of a polar grid and extended evenly
//! across the centre. Time stepping is Crank–Nicolson with a Newton solve,
//! so fine radial grids are not bound by an explicit step limit.

use crate::curvfun::CurvatureSpec;
use crate::error::{arg, Error, Result};
use crate::flow::scale_factor;
use crate::grid::{build_grid, PolarGrid, Stencil};
use std::sync::Arc;

/// `f_*` restricted to `κ = (κ_r, κ_t, …, κ_t)`, using
/// `s_k = κ_t^{k-1} ((n-k) κ_t + k κ_r) / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    n: usize,
    k: usize,
    en: f64,
    ek: f64,
}

impl RadialLaw {
    pub fn new(spec: &CurvatureSpec) -> Result<Self> {
        let n = spec.n();
        let k = spec.k();
        let en = spec.beta() / n as f64;
        let ek = if k == 0 { 0.0 } else { (1.0 - spec.beta()) / k as f64 };
        Ok(RadialLaw { n, k, en, ek })
    }

    fn sk_parts(&self, kr: f64, kt: f64) -> f64 {
        let (n, k) = (self.n as f64, self.k as f64);
        (n - k) * kt + k * kr
    }

    pub fn value(&self, kr: f64, kt: f64) -> f64 {
        let n = self.n as f64;
        let sn = kr * kt.powi(self.n as i32 - 1);
        let mut f = sn.powf(self.en);
        if self.k > 0 && self.ek != 0.0 {
            let sk = kt.powi(self.k as i32 - 1) * self.sk_parts(kr, kt) / n;
            f *= sk.powf(self.ek);
        }
        f
    }

    /// `(∂ ln f/∂κ_r, ∂ ln f/∂κ_t)`, the latter summed over the tangential slots.
    pub fn log_partials(&self, kr: f64, kt: f64) -> (f64, f64) {
        let n = self.n as f64;
        let mut gr = self.en / kr;
        let mut gt = self.en * (n - 1.0) / kt;
        if self.k > 0 && self.ek != 0.0 {
            let k = self.k as f64;
            let q = self.sk_parts(kr, kt);
            gr += self.ek * k / q;
            gt += self.ek * ((k - 1.0) / kt + (n - k) / q);
        }
        (gr, gt)
    }
}

/// A radial dual profile on cell-centred nodes plus the boundary value at `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: f64,
    pub n: usize,
    pub t: f64,
    pub rho_nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub boundary: f64,
}

impl RadialProfile {
    pub fn from_fn(r: f64, n_rho: usize, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let g = radial_grid(r, n_rho)?;
        let rho_nodes = g.rho_nodes().to_vec();
        let values = rho_nodes.iter().map(|&p| f(p)).collect();
        Ok(RadialProfile { r, n, t: 0.0, rho_nodes, values, boundary: f(r) })
    }

    pub fn from_values(r: f64, n: usize, values: Vec<f64>, boundary: f64) -> Result<Self> {
        let g = radial_grid(r, values.len())?;
        Ok(RadialProfile { r, n, t: 0.0, rho_nodes: g.rho_nodes().to_vec(), values, boundary })
    }

    /// Cubic interpolation through the even extension and the boundary node.
    pub fn value_at(&self, rho: f64) -> Result<f64> {
        let rho = rho.abs();
        if rho > self.r {
            return arg(format!("radius {rho} outside [0, {}]", self.r));
        }
        let m = self.values.len();
        let h = self.r / m as f64;
        let node = |k: isize| -> (f64, f64) {
            if k < 0 {
                let kk = (-k - 1) as usize;
                (-self.rho_nodes[kk], self.values[kk])
            } else if (k as usize) < m {
                (self.rho_nodes[k as usize], self.values[k as usize])
            } else {
                (self.r, self.boundary)
            }
        };
        let base = ((rho / h - 0.5).floor() as isize).clamp(-1, m as isize - 1);
        let start = (base - 1).clamp(-2, m as isize - 3);
        let pts: Vec<(f64, f64)> = (start..start + 4).map(node).collect();
        let mut acc = 0.0;
        for (a, &(xa, ya)) in pts.iter().enumerate() {
            let mut l = 1.0;
            for (b, &(xb, _)) in pts.iter().enumerate() {
                if a != b {
                    l *= (rho - xb) / (xa - xb);
                }
            }
            acc += l * ya;
        }
        Ok(acc)
    }

    /// `(κ_r, κ_t)` at every node.
    pub fn curvatures(&self) -> Result<Vec<(f64, f64)>> {
        let g = radial_grid(self.r, self.values.len())?;
        Ok((0..self.values.len()).map(|i| node_curvatures(&g, &self.values, self.boundary, i)).collect())
    }
}

fn radial_grid(r: f64, n_rho: usize) -> Result<Arc<PolarGrid>> {
    if n_rho < 4 {
        return arg(format!("radial profile needs at least 4 nodes, got {n_rho}"));
    }
    build_grid(r, n_rho, 4)
}

/// Neighbour values `(u_{i-2}, u_{i-1}, u_i, u_{i+1})` under the even
/// extension, with the boundary value beyond the last node.
fn neighbours(u: &[f64], boundary: f64, i: usize) -> [f64; 4] {
    let m = u.len();
    let at = |k: isize| -> f64 {
        if k < 0 {
            u[(-k - 1) as usize]
        } else if (k as usize) < m {
            u[k as usize]
        } else {
            boundary
        }
    };
    let k = i as isize;
    [at(k - 2), at(k - 1), at(k), at(k + 1)]
}

fn derivs(s1: &Stencil, s2: &Stencil, v: [f64; 4]) -> (f64, f64) {
    let [um2, um, uc, up] = v;
    let d1 = s1.m * (um - uc) + s1.p * (up - uc);
    let d2 = s2.m2 * (um2 - uc) + s2.m * (um - uc) + s2.p * (up - uc);
    (d1, d2)
}

fn node_curvatures(g: &PolarGrid, u: &[f64], boundary: f64, i: usize) -> (f64, f64) {
    let rho = g.rho_nodes()[i];
    let w = (1.0 - rho * rho).sqrt();
    let (d1, d2) = derivs(&g.first_stencil(i), &g.second_stencil(i), neighbours(u, boundary, i));
    (w * w * w * d2, w * d1 / rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// `ε` of the boundary schedule `U₀(r) + ε(1 - S(t)) √(1 - r²)`.
    pub eps: f64,
    /// Target number of steps over `[0, T]`.
    pub steps: usize,
    pub tol_convex: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { eps: 1.0, steps: 2000, tol_convex: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct RadialTrajectory {
    pub snapshots: Vec<RadialProfile>,
    pub final_profile: RadialProfile,
    pub steps: usize,
    pub rejections: usize,
}

const NEWTON_MAX: usize = 30;
const MAX_REJECTIONS: usize = 20;

struct Linearisation {
    rhs: Vec<f64>,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    /// Coefficient of `u_{N-3}` in the last row.
    far: f64,
}

struct Solver<'a> {
    g: &'a PolarGrid,
    law: RadialLaw,
    alpha: f64,
    tol: f64,
    w: Vec<f64>,
}

impl Solver<'_> {
    /// Right-hand side `-f^{-α} w*` and its Jacobian with respect to the
    /// node values; `None` if any node is not strictly convex.
    fn linearise(&self, u: &[f64], boundary: f64) -> Result<Option<Linearisation>> {
        let m = u.len();
        let mut lin = Linearisation {
            rhs: vec![0.0; m],
            sub: vec![0.0; m],
            diag: vec![0.0; m],
            sup: vec![0.0; m],
            far: 0.0,
        };
        for i in 0..m {
            let rho = self.g.rho_nodes()[i];
            let w = self.w[i];
            let s1 = self.g.first_stencil(i);
            let s2 = self.g.second_stencil(i);
            let (d1, d2) = derivs(&s1, &s2, neighbours(u, boundary, i));
            let kr = w * w * w * d2;
            let kt = w * d1 / rho;
            if !(kr > self.tol && kt > self.tol) {
                if !(kr.is_finite() && kt.is_finite()) {
                    return Err(Error::Numeric { ring: i, angle: 0, what: "non-finite radial curvature".into() });
                }
                return Ok(None);
            }
            let f = self.law.value(kr, kt);
            let inv = f.powf(-self.alpha);
            lin.rhs[i] = -inv * w;
            let (gr, gt) = self.law.log_partials(kr, kt);
            let cr = self.alpha * inv * w * gr * w * w * w;
            let ct = self.alpha * inv * w * gt * w / rho;
            // ∂R/∂u_j = cr ∂u''/∂u_j + ct ∂u'/∂u_j
            let wm2 = cr * s2.m2;
            let wm = cr * s2.m + ct * s1.m;
            let wp = cr * s2.p + ct * s1.p;
            lin.diag[i] -= wm2 + wm + wp;
            if i + 1 < m {
                lin.sup[i] += wp;
            }
            match i {
                0 => {
                    lin.diag[0] += wm;
                    lin.sup[0] += wm2;
                }
                1 => lin.sub[1] += wm + wm2,
                _ => {
                    lin.sub[i] += wm;
                    if wm2 != 0.0 {
                        lin.far += wm2;
                    }
                }
            }
        }
        Ok(Some(lin))
    }

    /// One Crank–Nicolson step; `None` signals a rejected step.
    fn cn_step(&self, u: &[f64], rhs0: &[f64], b1: f64, dt: f64) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let m = u.len();
        let mut v: Vec<f64> = u.iter().zip(rhs0).map(|(a, r)| a + dt * r).collect();
        let half = 0.5 * dt;
        for _ in 0..NEWTON_MAX {
            let lin = match self.linearise(&v, b1)? {
                Some(l) => l,
                None => return Ok(None),
            };
            let mut res: Vec<f64> = (0..m).map(|i| -(v[i] - u[i] - half * (rhs0[i] + lin.rhs[i]))).collect();
            let mut a: Vec<f64> = lin.sub.iter().map(|x| -half * x).collect();
            let mut b: Vec<f64> = lin.diag.iter().map(|x| 1.0 - half * x).collect();
            let c: Vec<f64> = lin.sup.iter().map(|x| -half * x).collect();
            // Eliminate the u_{N-3} entry of the last row using row N-2.
            let far = -half * lin.far;
            if far != 0.0 {
                let q = far / a[m - 2];
                a[m - 1] -= q * b[m - 2];
                b[m - 1] -= q * c[m - 2];
                res[m - 1] -= q * res[m - 2];
            }
            let delta = thomas(&a, &b, &c, &res);
            let mut step = 0.0f64;
            for (x, d) in v.iter_mut().zip(&delta) {
                *x += d;
                step = step.max(d.abs());
            }
            if !step.is_finite() {
                return Ok(None);
            }
            let scale = v.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if step <= 1e-14 * scale {
                return Ok(self.linearise(&v, b1)?.map(|l| (v, l.rhs)));
            }
        }
        Ok(None)
    }
}

/// Tridiagonal solve; `a[0]` and `c[m-1]` are ignored.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let m = b.len();
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..m {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < m { c[i] / den } else { 0.0 };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = dp[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Evolves a radial profile to `t_end`, landing exactly on each snapshot time.
pub fn radial_run(
    spec: &CurvatureSpec,
    u0: &RadialProfile,
    t_end: f64,
    snapshot_times: &[f64],
    opts: RadialOptions,
) -> Result<RadialTrajectory> {
    if spec.n() != u0.n {
        return arg(format!("profile dimension {} differs from spec n = {}", u0.n, spec.n()));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return arg(format!("horizon T = {t_end} must be positive"));
    }
    if !(opts.eps > 0.0 && opts.eps <= 1.0) {
        return arg(format!("eps = {} must lie in (0, 1]", opts.eps));
    }
    if opts.steps == 0 {
        return arg("steps must be positive");
    }
    for w in snapshot_times.windows(2) {
        if !(w[0] < w[1]) {
            return arg("snapshot times must be strictly increasing");
        }
    }
    if let Some(&t) = snapshot_times.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
        return arg(format!("snapshot time {t} outside [0, {t_end}]"));
    }
    let g = radial_grid(u0.r, u0.values.len())?;
    let alpha = spec.alpha();
    let solver = Solver {
        g: &g,
        law: RadialLaw::new(spec)?,
        alpha,
        tol: opts.tol_convex,
        w: g.rho_nodes().iter().map(|p| (1.0 - p * p).sqrt()).collect(),
    };
    let wr = (1.0 - u0.r * u0.r).sqrt();
    let boundary = |t: f64| u0.boundary + opts.eps * (1.0 - scale_factor(alpha, t)) * wr;
    let mut u = u0.values.clone();
    let mut rhs = match solver.linearise(&u, u0.boundary)? {
        Some(l) => l.rhs,
        None => return Err(Error::Ingestion("initial radial profile is not strictly convex".into())),
    };
    let profile = |u: &[f64], t: f64| RadialProfile {
        r: u0.r,
        n: u0.n,
        t,
        rho_nodes: g.rho_nodes().to_vec(),
        values: u.to_vec(),
        boundary: boundary(t),
    };
    let target = t_end / opts.steps as f64;
    let mut dt = target;
    let mut t = 0.0;
    let mut snapshots = Vec::new();
    let mut next = 0;
    while next < snapshot_times.len() && snapshot_times[next] <= 0.0 {
        snapshots.push(profile(&u, 0.0));
        next += 1;
    }
    let (mut steps, mut rejections, mut streak, mut good) = (0, 0, 0, 0);
    while t < t_end {
        let stop = snapshot_times.get(next).copied().unwrap_or(t_end);
        let mut h = dt.min(stop - t);
        if stop - t - h < 1e-9 * target {
            h = stop - t;
        }
        match solver.cn_step(&u, &rhs, boundary(t + h), h)? {
            Some((v, r)) => {
                t = if h == stop - t { stop } else { t + h };
                u = v;
                rhs = r;
                steps += 1;
                streak = 0;
                good += 1;
                if good >= 10 && dt < target {
                    dt = (2.0 * dt).min(target);
                    good = 0;
                }
                while next < snapshot_times.len() && snapshot_times[next] <= t {
                    snapshots.push(profile(&u, t));
                    next += 1;
                }
            }
            None => {
                rejections += 1;
                streak += 1;
                good = 0;
                if streak >= MAX_REJECTIONS {
                    return Err(Error::Aborted {
                        t,
                        detail: format!("{MAX_REJECTIONS} consecutive radial step rejections; last dt = {h:e}"),
                    });
                }
                dt = 0.5 * h;
            }
        }
    }
    Ok(RadialTrajectory { snapshots, final_profile: profile(&u, t_end), steps, rejections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvfun::f_star;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn radial_law_matches_general_form(
            idx in 0usize..5, kr in 0.05f64..20.0, kt in 0.05f64..20.0, alpha in 0.3f64..3.0
        ) {
            let (n, k, beta) = [(2, 0, 1.0), (2, 1, 0.5), (3, 1, 0.5), (3, 2, 1.0), (5, 3, 0.3)][idx];
            let spec = CurvatureSpec::new(n, k, beta, alpha).unwrap();
            let law = RadialLaw::new(&spec).unwrap();
            let mut kappa = vec![kt; n];
            kappa[0] = kr;
            let f = f_star(&spec, &kappa).unwrap();
            prop_assert!((law.value(kr, kt) - f).abs() <= 1e-12 * f);
            let (gr, gt) = law.log_partials(kr, kt);
            let hs = 1e-6;
            let fr = (law.value(kr * (1.0 + hs), kt).ln() - law.value(kr * (1.0 - hs), kt).ln()) / (2.0 * hs * kr);
            let ft = (law.value(kr, kt * (1.0 + hs)).ln() - law.value(kr, kt * (1.0 - hs)).ln()) / (2.0 * hs * kt);
            prop_assert!((gr - fr).abs() <= 1e-6 * gr.abs().max(1.0));
            prop_assert!((gt - ft).abs() <= 1e-6 * gt.abs().max(1.0));
        }
    }

    #[test]
    fn hyperboloid_curvatures_are_one() {
        let p = RadialProfile::from_fn(0.9, 256, 2, |r| -(1.0 - r * r).sqrt()).unwrap();
        for (kr, kt) in p.curvatures().unwrap() {
            assert_relative_eq!(kr, 1.0, epsilon = 2e-3);
            assert_relative_eq!(kt, 1.0, epsilon = 2e-4);
        }
    }

    #[test]
    fn reproduces_special_solution() {
        let spec = CurvatureSpec::new(2, 0, 1.0, 1.0).unwrap();
        let p = RadialProfile::from_fn(0.9, 256, 2, |r| -(1.0 - r * r).sqrt()).unwrap();
        let tr = radial_run(&spec, &p, 1.0, &[0.5, 1.0], RadialOptions { steps: 200, ..Default::default() }).unwrap();
        assert_eq!(tr.snapshots.len(), 2);
        let s = 3f64.sqrt();
        let fin = &tr.final_profile;
        assert_eq!(fin.t, 1.0);
        for (rho, u) in fin.rho_nodes.iter().zip(&fin.values) {
            assert!((u + s * (1.0 - rho * rho).sqrt()).abs() < 1e-4);
        }
        assert_relative_eq!(fin.boundary, -s * (1.0f64 - 0.81).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn higher_dimension_is_monotone() {
        let spec = CurvatureSpec::new(5, 3, 0.5, 1.0).unwrap();
        let p = RadialProfile::from_fn(0.9, 128, 5, |r| -(1.0 + 0.3 * r * r) * (1.0 - r * r).sqrt()).unwrap();
        let tr = radial_run(&spec, &p, 0.5, &[0.25, 0.5], RadialOptions { steps: 100, ..Default::default() }).unwrap();
        let (a, b) = (&tr.snapshots[0], &tr.snapshots[1]);
        for i in 0..a.values.len() {
            assert!(b.values[i] < a.values[i] && a.values[i] < p.values[i]);
        }
        for &rho in &[0.0, 0.1, 0.5, 0.87] {
            assert_eq!(b.value_at(rho).unwrap(), b.value_at(-rho).unwrap());
        }
    }

    #[test]
    fn interpolation_is_cubic() {
        let p = RadialProfile::from_fn(0.9, 64, 2, |r| 1.0 + r * r - 0.3 * r.powi(4)).unwrap();
        for rho in [0.0f64, 0.003, 0.2, 0.5, 0.88, 0.9] {
            let exact = 1.0 + rho * rho - 0.3 * rho.powi(4);
            assert_relative_eq!(p.value_at(rho).unwrap(), exact, epsilon = 1e-7);
        }
        assert!(p.value_at(0.95).is_err());
    }

    #[test]
    fn rejects_mismatched_dimension() {
        let spec = CurvatureSpec::new(3, 1, 0.5, 1.0).unwrap();
        let p = RadialProfile::from_fn(0.9, 32, 2, |r| -(1.0 - r * r).sqrt()).unwrap();
        assert!(radial_run(&spec, &p, 1.0, &[], RadialOptions::default()).is_err());
    }
}
