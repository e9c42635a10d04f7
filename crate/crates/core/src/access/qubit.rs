use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::{CMatrix, DensityMatrix, KrausChannel, Lindbladian};

const SLACK: f64 = 1e-12;
/// Denominators of the channel construction below this size count as degenerate.
const DEGENERATE: f64 = 1e-10;
/// Inward radial nudge applied to a target that hits a degenerate denominator.
const NUDGE: f64 = 1e-8;

/// Qubit state `ρ = (I + x σx + y σy + z σz) / 2`, so the ground population is `(1 + z)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn cx(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn real_matrix(rows: [[f64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| cx(rows[i][j]))
}

/// `e^{−iφσz/2}`, which rotates Bloch vectors by `φ` about the z axis.
fn z_rotation(phi: f64) -> CMatrix {
    let mut u = CMatrix::zeros(2, 2);
    u[(0, 0)] = Complex::from_polar(1.0, -phi / 2.0);
    u[(1, 1)] = Complex::from_polar(1.0, phi / 2.0);
    u
}

impl BlochState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let s = Self { x, y, z };
        if ![x, y, z].iter().all(|v| v.is_finite()) || s.radius() > 1.0 + 1e-10 {
            return Err(invalid(format!("({x}, {y}, {z}) is not in the Bloch ball")));
        }
        Ok(s)
    }

    /// State with ground population `p` and no coherence.
    pub fn from_population(p: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 2.0 * p - 1.0)
    }

    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn ground_population(&self) -> f64 {
        (1.0 + self.z) / 2.0
    }

    /// Distance from the z axis.
    pub fn transverse(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn density(&self) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = cx((1.0 + self.z) / 2.0);
        m[(1, 1)] = cx((1.0 - self.z) / 2.0);
        m[(0, 1)] = Complex::new(self.x, -self.y) / 2.0;
        m[(1, 0)] = Complex::new(self.x, self.y) / 2.0;
        m
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.density())
    }

    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.nrows(),
            });
        }
        let off = m[(1, 0)] + m[(0, 1)].conj();
        Self::new(off.re, off.im, (m[(0, 0)] - m[(1, 1)]).re)
    }

    /// Azimuth about the z axis.
    fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates into the `x ≥ 0, y = 0` half plane.
    fn reduced(&self) -> Self {
        Self {
            x: self.transverse(),
            y: 0.0,
            z: self.z,
        }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta.is_finite() && zeta.abs() <= 1.0) {
        return Err(invalid(format!("fixed-point polarisation {zeta} is outside [−1, 1]")));
    }
    Ok(())
}

fn check_full_rank(zeta: f64) -> Result<()> {
    check_zeta(zeta)?;
    if zeta.abs() >= 1.0 {
        return Err(Error::DegenerateFixedPoint(format!(
            "ζ = {zeta} gives a pure fixed point"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Monotones {
    pub r_plus: f64,
    pub r_minus: f64,
    pub delta: f64,
}

/// Monotones `R± = δ ± ζz` with `δ = √((z − ζ)² + (x² + y²)(1 − ζ²))`, for the
/// fixed point with Bloch vector `(0, 0, ζ)`.
pub fn qubit_monotones(rho: &BlochState, zeta: f64) -> Result<Monotones> {
    check_zeta(zeta)?;
    let t = rho.transverse();
    let delta = ((rho.z - zeta).powi(2) + t * t * (1.0 - zeta * zeta)).sqrt();
    Ok(Monotones {
        r_plus: delta + zeta * rho.z,
        r_minus: delta - zeta * rho.z,
        delta,
    })
}

/// Whether a channel fixing `(0, 0, ζ)` can take `rho` to `rho_prime`.
pub fn qubit_accessible(rho: &BlochState, rho_prime: &BlochState, zeta: f64) -> Result<bool> {
    let a = qubit_monotones(rho, zeta)?;
    let b = qubit_monotones(rho_prime, zeta)?;
    Ok(b.r_plus <= a.r_plus + SLACK && b.r_minus <= a.r_minus + SLACK)
}

/// Circle in the x–z plane centred on the z axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Circle {
    pub center_z: f64,
    pub radius: f64,
}

impl Circle {
    /// Signed distance of a state from the circle; negative inside.
    pub fn radial_offset(&self, s: &BlochState) -> f64 {
        s.transverse().hypot(s.z - self.center_z) - self.radius
    }

    /// Point of the circle at height `z` with `x ≥ 0`, if there is one.
    pub fn point_at(&self, z: f64) -> Option<BlochState> {
        let x2 = self.radius * self.radius - (z - self.center_z).powi(2);
        (x2 >= 0.0).then(|| BlochState { x: x2.sqrt(), y: 0.0, z })
    }
}

/// Level sets of `R₊` (`upper`, bounding states with larger z) and of `R₋` (`lower`)
/// through a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtremalCircles {
    pub upper: Circle,
    pub lower: Circle,
}

pub fn extremal_circles(rho: &BlochState, zeta: f64) -> Result<ExtremalCircles> {
    check_full_rank(zeta)?;
    let m = qubit_monotones(rho, zeta)?;
    let z2 = zeta * zeta;
    let r0 = (m.r_plus - z2) / (1.0 - z2);
    let r1 = (m.r_minus + z2) / (1.0 - z2);
    Ok(ExtremalCircles {
        upper: Circle {
            center_z: zeta * (1.0 - r0),
            radius: r0,
        },
        lower: Circle {
            center_z: zeta * (1.0 + r1),
            radius: r1,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    Upper,
    Lower,
}

/// Real orthogonal `U` with `U |ψ⟩ = |0⟩`, where `ψ` has Bloch vector `(nx, 0, nz)`.
fn aligning_rotation(nx: f64, nz: f64) -> DMatrix<f64> {
    let half = nx.atan2(nz) / 2.0;
    let (s, c) = half.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

/// `(a, ε)` with `Γ = [[a, ε√(a(1−a))], [·, 1 − a]]`; `ε` carries the sign of the off-diagonal.
fn gamma_parameters(g: &DMatrix<f64>) -> (f64, f64) {
    let a = g[(0, 0)];
    (a, g[(0, 1)] / (a * (1.0 - a)).sqrt())
}

/// Channel fixing `(0, 0, ζ)` and moving `rho` along one of its extremal circles to
/// `target`, both in the `x ≥ 0, y = 0` half plane.
fn arc_channel(rho: &BlochState, target: &BlochState, zeta: f64, branch: Branch) -> Result<Option<[DMatrix<f64>; 3]>> {
    let circles = extremal_circles(rho, zeta)?;
    let circle = match branch {
        Branch::Upper => circles.upper,
        Branch::Lower => circles.lower,
    };
    if circle.radius <= SLACK {
        return Err(Error::NoChannel("the state is the fixed point".into()));
    }
    // Pure states in the decompositions ρ = (1 − R)γ + Rψ and ρ = (1 + R)γ − Rψ.
    let sign = match branch {
        Branch::Upper => 1.0,
        Branch::Lower => -1.0,
    };
    let normal = |s: &BlochState| {
        (
            sign * s.x / circle.radius,
            sign * (s.z - circle.center_z) / circle.radius,
        )
    };
    let (nx, nz) = normal(rho);
    let (mx, mz) = normal(target);
    let u = aligning_rotation(nx, nz);
    let up = aligning_rotation(mx, mz);
    let fixed = DMatrix::from_row_slice(2, 2, &[(1.0 + zeta) / 2.0, 0.0, 0.0, (1.0 - zeta) / 2.0]);
    let (a, e) = gamma_parameters(&(&u * &fixed * u.transpose()));
    let (ap, ep) = gamma_parameters(&(&up * &fixed * up.transpose()));

    let den = 1.0 - (a / ap) * (1.0 - e * e);
    if ap.abs() < DEGENERATE || (1.0 - a).abs() < DEGENERATE || den.abs() < DEGENERATE {
        return Ok(None);
    }
    let w2 = (ap - a) / (1.0 - a);
    if w2 < -1e-12 {
        return Err(Error::NoChannel(format!(
            "target lies on the wrong side of the extremal circle (ω² = {w2:e})"
        )));
    }
    let w2 = w2.max(0.0);
    let alpha = (a * (1.0 - ap) / (ap * (1.0 - a))).sqrt() * e * ep / den;
    let beta = ((ap - a).max(0.0) * (1.0 - ap) / ((1.0 - a) * ap)).sqrt() * ep / den;
    let g2 = ((1.0 - ep * ep) - (a / ap) * (1.0 - e * e)) / den;
    let gamma = g2.max(0.0).sqrt() * ((1.0 - ap) / (1.0 - a)).sqrt();
    let omega = w2.sqrt();
    let core = [
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, alpha]),
        DMatrix::from_row_slice(2, 2, &[0.0, omega, 0.0, beta]),
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, gamma]),
    ];
    Ok(Some(core.map(|k| up.transpose() * k * &u)))
}

fn to_complex_ops(ops: &[DMatrix<f64>]) -> Vec<CMatrix> {
    ops.iter().map(|k| k.map(cx)).collect()
}

/// Arc construction with the unital rotation and degenerate-denominator retry.
fn arc_ops(rho: &BlochState, target: &BlochState, zeta: f64, branch: Branch, retry: bool) -> Result<Vec<DMatrix<f64>>> {
    if rho.max_abs_diff(target) < 1e-14 {
        return Ok(vec![DMatrix::identity(2, 2)]);
    }
    if zeta.abs() < DEGENERATE {
        // Unital case: a rotation in the x–z plane suffices.
        let half = (rho.z.atan2(rho.x) - target.z.atan2(target.x)) / 2.0;
        let (s, c) = half.sin_cos();
        return Ok(vec![DMatrix::from_row_slice(2, 2, &[c, -s, s, c])]);
    }
    if let Some(ops) = arc_channel(rho, target, zeta, branch)? {
        return Ok(ops.to_vec());
    }
    if !retry {
        return Err(Error::Numerical("degenerate channel construction".into()));
    }
    let c = extremal_circles(rho, zeta)?;
    let circle = if branch == Branch::Upper { c.upper } else { c.lower };
    let scale = 1.0 - NUDGE / circle.radius;
    let nudged = BlochState {
        x: target.x * scale,
        y: 0.0,
        z: circle.center_z + (target.z - circle.center_z) * scale,
    };
    reduced_channel(rho, &nudged, zeta, false)
}

/// Channel fixing `(0, 0, ζ)` that maps `rho` to `rho_prime`, both in the reduced half plane.
fn reduced_channel(rho: &BlochState, target: &BlochState, zeta: f64, retry: bool) -> Result<Vec<DMatrix<f64>>> {
    if rho.max_abs_diff(target) < 1e-14 {
        return Ok(vec![DMatrix::identity(2, 2)]);
    }
    let circles = extremal_circles(rho, zeta)?;
    let (up, lo) = (circles.upper, circles.lower);
    let on = |c: &Circle| c.radial_offset(target).abs() <= 1e-12;
    if on(&up) && target.z >= rho.z {
        return arc_ops(rho, target, zeta, Branch::Upper, retry);
    }
    if on(&lo) && target.z <= rho.z {
        return arc_ops(rho, target, zeta, Branch::Lower, retry);
    }

    // Otherwise mix the two boundary points of the accessible lens at the same x.
    let x = target.x;
    let span = |c: &Circle| (c.radius * c.radius - x * x).max(0.0).sqrt();
    let (s0, s1) = (span(&up), span(&lo));
    let top = if up.center_z + s0 <= lo.center_z + s1 {
        (up.center_z + s0, up, Branch::Upper)
    } else {
        (lo.center_z + s1, lo, Branch::Lower)
    };
    let bottom = if up.center_z - s0 >= lo.center_z - s1 {
        (up.center_z - s0, up, Branch::Upper)
    } else {
        (lo.center_z - s1, lo, Branch::Lower)
    };
    let endpoint = |(z, c, _): (f64, Circle, Branch)| c.point_at(z).unwrap_or(BlochState { x, y: 0.0, z });
    let (a, b) = (endpoint(top), endpoint(bottom));
    let ka = arc_ops(rho, &a, zeta, top.2, retry)?;
    let height = a.z - b.z;
    if height < 1e-12 {
        return Ok(ka);
    }
    let w = ((target.z - b.z) / height).clamp(0.0, 1.0);
    let kb = arc_ops(rho, &b, zeta, bottom.2, retry)?;
    Ok(ka
        .into_iter()
        .map(|k| k * w.sqrt())
        .chain(kb.into_iter().map(|k| k * (1.0 - w).sqrt()))
        .collect())
}

/// Channel that fixes the state with Bloch vector `(0, 0, ζ)` and maps `rho` to `rho_prime`.
///
/// Targets on an extremal circle get three Kraus operators. Interior targets are
/// written as a mixture of two boundary targets and get the union of both sets.
/// States off the `y = 0` plane are rotated about the z axis, which fixes `γ`.
pub fn alberti_uhlmann_channel(rho: &BlochState, rho_prime: &BlochState, zeta: f64) -> Result<KrausChannel> {
    check_full_rank(zeta)?;
    if !qubit_accessible(rho, rho_prime, zeta)? {
        return Err(Error::NoChannel(
            "target increases one of the monotones R±".into(),
        ));
    }
    let ops = reduced_channel(&rho.reduced(), &rho_prime.reduced(), zeta, true)?;
    let into = z_rotation(-rho.azimuth());
    let out = z_rotation(rho_prime.azimuth());
    let ops = to_complex_ops(&ops)
        .into_iter()
        .map(|k| &out * k * &into)
        .collect();
    KrausChannel::with_tolerance(ops, 1e-9)
}

/// Generator with no Hamiltonian and jump part
/// `Φ(ρ) = (ρ₀₀/γ₀)(γ − γ₁|γ⟩⟨γ|) + ρ₁₁|γ⟩⟨γ|`, `|γ⟩ = √γ₀|0⟩ + √γ₁|1⟩`.
///
/// It fixes the diagonal state `γ = diag(γ₀, γ₁)` yet creates coherence from `|1⟩⟨1|`.
/// `Φ` is completely positive only for `γ₀ ≥ 1/2`.
pub fn exotic_thermalizer(gamma0: f64) -> Result<Lindbladian> {
    if !(gamma0 > 0.0 && gamma0 < 1.0) {
        return Err(invalid(format!("γ₀ = {gamma0} is outside (0, 1)")));
    }
    if gamma0 < 0.5 {
        return Err(Error::NoChannel(format!(
            "the jump part is not completely positive for γ₀ = {gamma0} < 1/2"
        )));
    }
    let g1 = 1.0 - gamma0;
    let (s0, s1) = (gamma0.sqrt(), g1.sqrt());
    let proj = DMatrix::from_row_slice(2, 2, &[gamma0, s0 * s1, s0 * s1, g1]);
    let block = (DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![gamma0, g1])) - proj * g1) / gamma0;
    let eig = SymmetricEigen::new(block);
    let mut ops = Vec::new();
    for k in 0..2 {
        let lam = eig.eigenvalues[k].max(0.0);
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            ops.push(CMatrix::from_fn(2, 2, |i, j| if j == 0 { cx(lam.sqrt() * v[i]) } else { cx(0.0) }));
        }
    }
    ops.push(real_matrix([[0.0, s0], [0.0, s1]]));
    Lindbladian::new(CMatrix::zeros(2, 2), ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(x: f64, z: f64) -> BlochState {
        BlochState::new(x, 0.0, z).unwrap()
    }

    fn residuals(ch: &KrausChannel, rho: &BlochState, target: &BlochState, zeta: f64) -> (f64, f64, f64) {
        let fixed = bs(0.0, zeta).density();
        let hit = ch.apply_matrix(&rho.density()) - target.density();
        let fix = ch.apply_matrix(&fixed) - &fixed;
        let norm = |m: CMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (ch.completeness_residual(), norm(fix), norm(hit))
    }

    #[test]
    fn monotone_values() {
        let m = qubit_monotones(&bs(0.5, 0.0), 0.25).unwrap();
        assert!((m.delta - 19f64.sqrt() / 8.0).abs() < 1e-15);
        assert!((m.r_plus - 0.544862).abs() < 1e-6);
        let m = qubit_monotones(&bs(0.0, 0.3), 0.3).unwrap();
        assert_eq!(m.delta, 0.0);
        assert!((m.r_plus - 0.09).abs() < 1e-15 && (m.r_minus + 0.09).abs() < 1e-15);
        let m = qubit_monotones(&bs(0.6, 0.0), 0.0).unwrap();
        assert!((m.r_plus - 0.6).abs() < 1e-15 && (m.r_minus - 0.6).abs() < 1e-15);
    }

    #[test]
    fn circle_values() {
        let c = extremal_circles(&bs(0.5, 0.0), 0.25).unwrap();
        assert!((c.upper.radius - 0.514520).abs() < 1e-6);
        assert!(c.upper.radial_offset(&bs(0.5, 0.0)).abs() < 1e-14);
        assert!(c.lower.radial_offset(&bs(0.5, 0.0)).abs() < 1e-14);
        let c = extremal_circles(&bs(0.0, 0.5), 0.5).unwrap();
        assert!(c.upper.radius.abs() < 1e-15 && c.lower.radius.abs() < 1e-15);
        assert!(matches!(extremal_circles(&bs(0.0, 0.0), 1.0), Err(Error::DegenerateFixedPoint(_))));
    }

    #[test]
    fn circle_membership_decides_accessibility() {
        let (rho, zeta) = (bs(0.0, -1.0 / 3.0), 0.5);
        let up = extremal_circles(&rho, zeta).unwrap().upper;
        let on = up.point_at(rho.z + 0.1).unwrap();
        assert!(qubit_accessible(&rho, &on, zeta).unwrap());
        let out = bs(on.x + 1e-3 * on.x / up.radius, up.center_z + (on.z - up.center_z) * (1.0 + 1e-3 / up.radius));
        assert!(!qubit_accessible(&rho, &out, zeta).unwrap());
        assert!(qubit_accessible(&rho, &bs(0.0, zeta), zeta).unwrap());
    }

    #[test]
    fn arc_targets_are_hit() {
        for (rho, zeta, dz) in [
            (bs(0.0, -1.0 / 3.0), 0.5, 0.01),
            (bs(0.5, 0.0), 0.25, 0.05),
            (bs(0.5, 0.0), 0.25, -0.05),
            (bs(0.0, 5.0 / 6.0), 0.25, -0.01),
        ] {
            let c = extremal_circles(&rho, zeta).unwrap();
            let circle = if dz > 0.0 { c.upper } else { c.lower };
            let target = circle.point_at(rho.z + dz).unwrap();
            let ch = alberti_uhlmann_channel(&rho, &target, zeta).unwrap();
            assert_eq!(ch.ops().len(), 3);
            let (comp, fix, hit) = residuals(&ch, &rho, &target, zeta);
            assert!(comp < 1e-12 && fix < 1e-12 && hit < 1e-12, "{comp:e} {fix:e} {hit:e}");
        }
    }

    #[test]
    fn interior_and_rotated_targets() {
        let zeta = 0.4;
        let rho = BlochState::new(0.3, -0.4, 0.2).unwrap();
        for target in [bs(0.1, 0.35), bs(0.0, 0.4), BlochState::new(-0.2, 0.1, 0.3).unwrap()] {
            assert!(qubit_accessible(&rho, &target, zeta).unwrap());
            let ch = alberti_uhlmann_channel(&rho, &target, zeta).unwrap();
            let (comp, fix, hit) = residuals(&ch, &rho, &target, zeta);
            assert!(comp < 1e-12 && fix < 1e-12 && hit < 1e-12, "{comp:e} {fix:e} {hit:e}");
        }
        assert!(matches!(
            alberti_uhlmann_channel(&rho, &bs(0.0, 1.0), zeta),
            Err(Error::NoChannel(_))
        ));
    }

    #[test]
    fn exotic_thermalizer_properties() {
        let g0 = 0.7;
        let l = exotic_thermalizer(g0).unwrap();
        let gamma = bs(0.0, 2.0 * g0 - 1.0).density();
        assert!(l.apply(&gamma).iter().all(|z| z.norm() < 1e-12));
        let excited = bs(0.0, -1.0).density();
        let rate = l.apply(&excited)[(0, 1)];
        assert!((rate.re - (g0 * (1.0 - g0)).sqrt()).abs() < 1e-12 && rate.im.abs() < 1e-15);
        let dual: CMatrix = l.cp_part().iter().map(|k| k.adjoint() * k).sum();
        assert!((dual - CMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-12));
        assert!(exotic_thermalizer(1.0).is_err());
        assert!(exotic_thermalizer(0.3).is_err());
    }
}
