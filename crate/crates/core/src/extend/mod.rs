//! Band-limited Fourier representations on necks and disks, the harmonic extension,
//! the refined extension operators for cross-caps and handles, and their energies.
//!
//! A neck field is u(theta, t) = sum_k u_k(t) e^{i k theta}, |k| <= K, with each
//! profile u_k a Chebyshev series in t; the circle has length 2 pi. Disk fields are
//! written in the normalized radius rho = r / eps of a disk of radius eps, so every
//! energy below is scale free.

pub mod quad;
pub mod transfer;

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use quad::{gauss_legendre, integrate, integrate_dyadic, Chebyshev};

pub use transfer::{transfer, transfer_onto, TransferResult};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which neck a field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeckKind {
    /// Möbius band, fundamental domain t in [0, L] with (z, 0) ~ (-z, 0).
    Crosscap,
    /// Cylinder t in [-L, L].
    Handle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    EvenPart,
    OddPart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    /// z -> -z on the Möbius band: parity of the Fourier index k.
    CrosscapRotation,
    /// t -> -t on the cylinder: parity of each profile in t.
    HandleReflection,
}

/// Real circle data as conjugate-symmetric Fourier coefficients, one set per component.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleTrace {
    band: usize,
    coeffs: Vec<Vec<Complex64>>,
}

fn idx(k: i64, band: usize) -> usize {
    (k + band as i64) as usize
}

impl CircleTrace {
    /// Coefficients indexed k = -K..=K per component; must satisfy a_{-k} = conj(a_k).
    pub fn new(band: usize, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        for c in &coeffs {
            if c.len() != 2 * band + 1 {
                return Err(Error::InvalidInput(format!(
                    "trace needs {} coefficients per component, got {}",
                    2 * band + 1,
                    c.len()
                )));
            }
            let scale = c.iter().fold(0.0f64, |m, a| m.max(a.norm())).max(1e-300);
            for k in 0..=band as i64 {
                if (c[idx(k, band)] - c[idx(-k, band)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "coefficient of mode {k} is not conjugate symmetric"
                    )));
                }
            }
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("trace needs at least one component".into()));
        }
        Ok(CircleTrace { band, coeffs })
    }

    /// Least-squares fit of band limit K to N equispaced samples at theta_j = 2 pi j / N.
    /// Returns the trace and the relative l2 residual of the fit.
    pub fn fit_samples(samples: &[f64], band: usize) -> Result<(Self, f64)> {
        let n = samples.len();
        if n == 0 || 2 * band + 1 > n {
            return Err(Error::InvalidInput(format!(
                "band limit {band} needs at least {} samples, got {n}",
                2 * band + 1
            )));
        }
        // equispaced exponentials are orthogonal for |k| <= K < N/2, so the fit is a DFT
        let mut c = vec![ZERO; 2 * band + 1];
        for k in 0..=band as i64 {
            let mut s = ZERO;
            for (j, u) in samples.iter().enumerate() {
                let th = 2.0 * PI * j as f64 / n as f64;
                s += Complex64::from_polar(*u, -(k as f64) * th);
            }
            let a = s / n as f64;
            let a = if k == 0 { Complex64::new(a.re, 0.0) } else { a };
            c[idx(k, band)] = a;
            c[idx(-k, band)] = a.conj();
        }
        let trace = CircleTrace { band, coeffs: vec![c] };
        let mut err = 0.0;
        let mut norm = 0.0;
        for (j, u) in samples.iter().enumerate() {
            let th = 2.0 * PI * j as f64 / n as f64;
            err += (u - trace.eval(0, th)).powi(2);
            norm += u * u;
        }
        let rel = if norm > 0.0 { (err / norm).sqrt() } else { err.sqrt() };
        Ok((trace, rel))
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn components(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, comp: usize, k: i64) -> Complex64 {
        self.coeffs[comp][idx(k, self.band)]
    }

    pub fn eval(&self, comp: usize, theta: f64) -> f64 {
        let mut s = 0.0;
        for k in -(self.band as i64)..=self.band as i64 {
            s += (self.coeff(comp, k) * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        s
    }
}

/// Neck field with Chebyshev profiles u_k(t), stored for k = -K..=K per component.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderField {
    kind: NeckKind,
    half_length: f64,
    band: usize,
    modes: Vec<Vec<Chebyshev>>,
    symmetry: Symmetry,
}

impl CylinderField {
    /// Builds a real field from profiles given for k >= 0 (negative modes are conjugates;
    /// the k = 0 profile is made real). Profiles are interpolated at the given degree.
    pub fn from_profiles(
        kind: NeckKind,
        half_length: f64,
        band: usize,
        components: usize,
        degree: usize,
        f: impl Fn(usize, usize, f64) -> Complex64,
    ) -> Result<Self> {
        if !(half_length > 0.0) || components == 0 {
            return Err(Error::InvalidInput("neck field needs L > 0 and a component".into()));
        }
        let (a, b) = domain(kind, half_length);
        let mut modes = Vec::with_capacity(components);
        for c in 0..components {
            let mut row = vec![Chebyshev::zero(a, b); 2 * band + 1];
            for k in 0..=band {
                let p = if k == 0 {
                    Chebyshev::interpolate(a, b, degree, |t| Complex64::new(f(c, 0, t).re, 0.0))
                } else {
                    Chebyshev::interpolate(a, b, degree, |t| f(c, k, t))
                };
                row[idx(-(k as i64), band)] = p.conj();
                row[idx(k as i64, band)] = p;
            }
            modes.push(row);
        }
        let field = CylinderField {
            kind,
            half_length,
            band,
            modes,
            symmetry: Symmetry::None,
        };
        field.check_core()?;
        Ok(field)
    }

    /// Random real field with decaying Chebyshev coefficients, satisfying the
    /// cross-cap core condition when `kind` is a cross-cap.
    pub fn random<R: Rng>(
        kind: NeckKind,
        half_length: f64,
        band: usize,
        components: usize,
        degree: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let (a, b) = domain(kind, half_length);
        let mut modes = Vec::with_capacity(components);
        for _ in 0..components {
            let mut row = vec![Chebyshev::zero(a, b); 2 * band + 1];
            for k in 0..=band {
                let amp = 1.0 / (1.0 + k as f64);
                let mut c: Vec<Complex64> = (0..=degree)
                    .map(|j| {
                        let d = amp * 0.6f64.powi(j as i32);
                        let im = if k == 0 { 0.0 } else { rng.gen_range(-d..d) };
                        Complex64::new(rng.gen_range(-d..d), im)
                    })
                    .collect();
                let mut p = Chebyshev::new(a, b, c.clone());
                if kind == NeckKind::Crosscap && k % 2 == 1 {
                    c[0] -= p.eval(0.0);
                    p = Chebyshev::new(a, b, c);
                }
                row[idx(-(k as i64), band)] = p.conj();
                row[idx(k as i64, band)] = p;
            }
            modes.push(row);
        }
        Ok(CylinderField {
            kind,
            half_length,
            band,
            modes,
            symmetry: Symmetry::None,
        })
    }

    fn check_core(&self) -> Result<()> {
        if self.kind != NeckKind::Crosscap {
            return Ok(());
        }
        let scale = self.sup_estimate().max(1e-300);
        for row in &self.modes {
            for k in (1..=self.band as i64).step_by(2) {
                if row[idx(k, self.band)].eval(0.0).norm() > 1e-10 * scale {
                    return Err(Error::InvalidInput(format!(
                        "cross-cap field: odd mode {k} does not vanish on the core circle"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sup_estimate(&self) -> f64 {
        self.modes
            .iter()
            .flatten()
            .map(|p| p.coeffs().iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn kind(&self) -> NeckKind {
        self.kind
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn components(&self) -> usize {
        self.modes.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn profile(&self, comp: usize, k: i64) -> &Chebyshev {
        &self.modes[comp][idx(k, self.band)]
    }

    pub fn t_range(&self) -> (f64, f64) {
        domain(self.kind, self.half_length)
    }

    pub fn eval(&self, comp: usize, theta: f64, t: f64) -> f64 {
        let mut s = 0.0;
        for k in -(self.band as i64)..=self.band as i64 {
            s += (self.profile(comp, k).eval(t) * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        s
    }

    /// Fourier coefficients of the circle at height t.
    pub fn trace_at(&self, t: f64) -> CircleTrace {
        let coeffs = self
            .modes
            .iter()
            .map(|row| row.iter().map(|p| p.eval(t)).collect())
            .collect();
        CircleTrace {
            band: self.band,
            coeffs,
        }
    }

    /// Per-mode energies 2 pi int (|u_k'|^2 + k^2 |u_k|^2) dt, summed over components,
    /// indexed k = -K..=K. Exact Gauss–Legendre for the polynomial integrands.
    pub fn mode_energies(&self) -> Vec<f64> {
        let (a, b) = self.t_range();
        let mut out = vec![0.0; 2 * self.band + 1];
        for row in &self.modes {
            for k in -(self.band as i64)..=self.band as i64 {
                let p = &row[idx(k, self.band)];
                if p.is_zero() {
                    continue;
                }
                let n = p.degree() + 2;
                let kk = (k * k) as f64;
                out[idx(k, self.band)] += 2.0
                    * PI
                    * integrate(a, b, n, |t| p.deriv(t).norm_sqr() + kk * p.eval(t).norm_sqr());
            }
        }
        out
    }

    fn with_modes(&self, f: impl Fn(i64, &Chebyshev) -> Chebyshev, symmetry: Symmetry) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|row| {
                (-(self.band as i64)..=self.band as i64)
                    .map(|k| f(k, &row[idx(k, self.band)]))
                    .collect()
            })
            .collect();
        CylinderField {
            kind: self.kind,
            half_length: self.half_length,
            band: self.band,
            modes,
            symmetry,
        }
    }

    /// Checks that this is a pure odd part for its neck.
    pub fn is_odd(&self, tol: f64) -> bool {
        let scale = self.sup_estimate().max(1e-300);
        match self.kind {
            NeckKind::Crosscap => self.modes.iter().all(|row| {
                (-(self.band as i64)..=self.band as i64).all(|k| {
                    let p = &row[idx(k, self.band)];
                    if k % 2 == 0 {
                        p.coeffs().iter().all(|c| c.norm() <= tol * scale)
                    } else {
                        p.eval(0.0).norm() <= tol * scale
                    }
                })
            }),
            NeckKind::Handle => self.modes.iter().flatten().all(|p| {
                p.coeffs()
                    .iter()
                    .step_by(2)
                    .all(|c| c.norm() <= tol * scale)
            }),
        }
    }
}

fn domain(kind: NeckKind, l: f64) -> (f64, f64) {
    match kind {
        NeckKind::Crosscap => (0.0, l),
        NeckKind::Handle => (-l, l),
    }
}

/// Splits a neck field into its even and odd parts; u = u_E + u_O exactly.
pub fn split_even_odd(u: &CylinderField, how: Splitting) -> Result<(CylinderField, CylinderField)> {
    match (how, u.kind) {
        (Splitting::CrosscapRotation, NeckKind::Crosscap) => {
            let zero = |p: &Chebyshev| {
                let (a, b) = p.domain();
                Chebyshev::zero(a, b)
            };
            let even = u.with_modes(|k, p| if k % 2 == 0 { p.clone() } else { zero(p) }, Symmetry::EvenPart);
            let odd = u.with_modes(|k, p| if k % 2 != 0 { p.clone() } else { zero(p) }, Symmetry::OddPart);
            Ok((even, odd))
        }
        (Splitting::HandleReflection, NeckKind::Handle) => {
            // the profile domain is symmetric, so T_j(-x) = (-1)^j T_j(x)
            let even = u.with_modes(
                |_, p| p.map_coeffs(|j, c| if j % 2 == 0 { c } else { ZERO }),
                Symmetry::EvenPart,
            );
            let odd = u.with_modes(
                |_, p| p.map_coeffs(|j, c| if j % 2 == 1 { c } else { ZERO }),
                Symmetry::OddPart,
            );
            Ok((even, odd))
        }
        _ => Err(Error::InvalidInput(
            "splitting does not match the neck kind of the field".into(),
        )),
    }
}

/// How the normalized radius of a disk maps to the neck coordinate t.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogMap {
    /// t = L + log rho (cross-cap disk; handle disk at q).
    Outward,
    /// t = -L - log rho (handle disk at p).
    Inward,
}

/// How the local polar angle of a disk maps to the neck angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngleMap {
    Identity,
    /// Neck angle = 2 alpha - local angle.
    Reflect(f64),
}

impl AngleMap {
    fn apply(self, psi: f64) -> f64 {
        match self {
            AngleMap::Identity => psi,
            AngleMap::Reflect(a) => 2.0 * a - psi,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Pullback {
    source: CylinderField,
    map: LogMap,
}

/// Field on a disk of radius eps: a harmonic part with profiles rho^|k| plus an
/// optional pulled-back odd neck field supported on e^{-L} <= rho <= 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskField {
    radius: f64,
    band: usize,
    harmonic: Vec<Vec<Complex64>>,
    pulled: Option<Pullback>,
    angle: AngleMap,
}

impl DiskField {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_radius(mut self, eps: f64) -> Self {
        self.radius = eps;
        self
    }

    pub fn with_angle_map(mut self, angle: AngleMap) -> Self {
        self.angle = angle;
        self
    }

    pub fn harmonic_coeff(&self, comp: usize, k: i64) -> Complex64 {
        self.harmonic[comp][idx(k, self.band)]
    }

    pub fn components(&self) -> usize {
        self.harmonic.len()
    }

    /// Inner radius (normalized) below which the pulled-back part vanishes.
    pub fn inner_radius(&self) -> Option<f64> {
        self.pulled.as_ref().map(|p| (-p.source.half_length).exp())
    }

    fn neck_t(&self, rho: f64) -> Option<(f64, &Pullback)> {
        let p = self.pulled.as_ref()?;
        let l = p.source.half_length;
        if rho < (-l).exp() || rho > 1.0 {
            return None;
        }
        let t = match p.map {
            LogMap::Outward => l + rho.ln(),
            LogMap::Inward => -l - rho.ln(),
        };
        Some((t, p))
    }

    /// Harmonic part at radius r (absolute) and local angle psi.
    pub fn eval_harmonic(&self, comp: usize, r: f64, psi: f64) -> f64 {
        let rho = r / self.radius;
        let th = self.angle.apply(psi);
        let mut s = 0.0;
        for k in -(self.band as i64)..=self.band as i64 {
            let a = self.harmonic[comp][idx(k, self.band)];
            s += (a * rho.powi(k.unsigned_abs() as i32) * Complex64::from_polar(1.0, k as f64 * th)).re;
        }
        s
    }

    /// Pulled-back part at radius r and local angle psi (zero inside e^{-L} eps).
    pub fn eval_pulled(&self, comp: usize, r: f64, psi: f64) -> f64 {
        let rho = r / self.radius;
        match self.neck_t(rho) {
            Some((t, p)) => p.source.eval(comp, self.angle.apply(psi), t),
            None => 0.0,
        }
    }

    pub fn eval(&self, comp: usize, r: f64, psi: f64) -> f64 {
        self.eval_harmonic(comp, r, psi) + self.eval_pulled(comp, r, psi)
    }

    /// Boundary trace coefficients (in the neck angle frame).
    pub fn boundary_trace(&self) -> CircleTrace {
        let mut coeffs = self.harmonic.clone();
        if let Some((t, p)) = self.neck_t(1.0) {
            for (c, row) in coeffs.iter_mut().enumerate() {
                for k in -(self.band as i64)..=self.band as i64 {
                    if k.unsigned_abs() as usize <= p.source.band {
                        row[idx(k, self.band)] += p.source.profile(c, k).eval(t);
                    }
                }
            }
        }
        CircleTrace {
            band: self.band,
            coeffs,
        }
    }

    /// Per-mode energies (indexed k = -K..=K, summed over components). Harmonic modes use
    /// the closed form 2 pi |k| |a_k|^2; pulled-back and cross terms use composite
    /// Gauss–Legendre on dyadic rings of [e^{-L}, 1].
    pub fn mode_energies(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.band + 1];
        for (c, row) in self.harmonic.iter().enumerate() {
            for k in -(self.band as i64)..=self.band as i64 {
                let a = row[idx(k, self.band)];
                out[idx(k, self.band)] += 2.0 * PI * k.unsigned_abs() as f64 * a.norm_sqr();
                let Some(p) = &self.pulled else { continue };
                if k.unsigned_abs() as usize > p.source.band {
                    continue;
                }
                let prof = p.source.profile(c, k);
                if prof.is_zero() {
                    continue;
                }
                let l = p.source.half_length;
                let kk = (k * k) as f64;
                let ka = k.unsigned_abs() as i32;
                let sign = match p.map {
                    LogMap::Outward => 1.0,
                    LogMap::Inward => -1.0,
                };
                let tmap = |rho: f64| match p.map {
                    LogMap::Outward => l + rho.ln(),
                    LogMap::Inward => -l - rho.ln(),
                };
                // the integrand is a polynomial in log rho; panels grow with its degree
                let sub = 1 + (prof.degree() + k.unsigned_abs() as usize) / 3;
                let e = integrate_dyadic((-l).exp(), sub, |rho| {
                    let t = tmap(rho);
                    let v = prof.eval(t);
                    let dv = prof.deriv(t) * (sign / rho);
                    let h = a * rho.powi(ka);
                    let dh = if ka == 0 { ZERO } else { a * (ka as f64) * rho.powi(ka - 1) };
                    let pulled = dv.norm_sqr() + kk * v.norm_sqr() / (rho * rho);
                    let cross = 2.0 * (dh * dv.conj()).re + 2.0 * kk * (h * v.conj()).re / (rho * rho);
                    (pulled + cross) * rho
                });
                out[idx(k, self.band)] += 2.0 * PI * e;
            }
        }
        out
    }
}

/// Dirichlet energy of a Fourier field.
pub trait DirichletEnergy {
    fn dirichlet_energy(&self) -> f64;
}

impl DirichletEnergy for CylinderField {
    fn dirichlet_energy(&self) -> f64 {
        self.mode_energies().iter().sum()
    }
}

impl DirichletEnergy for DiskField {
    fn dirichlet_energy(&self) -> f64 {
        self.mode_energies().iter().sum()
    }
}

pub fn dirichlet_energy(u: &impl DirichletEnergy) -> f64 {
    u.dirichlet_energy()
}

/// Harmonic extension of a circle trace to the unit disk.
pub fn harmonic_extend(trace: &CircleTrace) -> DiskField {
    DiskField {
        radius: 1.0,
        band: trace.band,
        harmonic: trace.coeffs.clone(),
        pulled: None,
        angle: AngleMap::Identity,
    }
}

/// Smallest energy of a function on the cylinder [0, L] x S^1 with trace a e^{ik theta}
/// at t = L: 2 pi k tanh(kL) |a|^2, attained by a cosh(kt)/cosh(kL).
pub fn min_cylinder_energy(k: u32, half_length: f64, a: Complex64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let k = k as f64;
    2.0 * PI * k * (k * half_length).tanh() * a.norm_sqr()
}

/// Pulls an odd neck field back to the unit disk through z -> (z/|z|, L + log|z|);
/// zero on the inner disk of radius e^{-L}.
pub fn conformal_log_pullback(u_odd: &CylinderField) -> Result<DiskField> {
    if !u_odd.is_odd(1e-12) {
        return Err(Error::InvalidInput(
            "conformal pullback needs a pure odd part (vanishing on the core circle)".into(),
        ));
    }
    Ok(DiskField {
        radius: 1.0,
        band: u_odd.band,
        harmonic: vec![vec![ZERO; 2 * u_odd.band + 1]; u_odd.components()],
        pulled: Some(Pullback {
            source: u_odd.clone(),
            map: LogMap::Outward,
        }),
        angle: AngleMap::Identity,
    })
}

/// K(u) = H(u_E) + K(u_O) for a field on the Möbius band.
pub fn refined_extend_crosscap(u: &CylinderField) -> Result<DiskField> {
    if u.kind != NeckKind::Crosscap {
        return Err(Error::InvalidInput("expected a cross-cap neck field".into()));
    }
    let (even, odd) = split_even_odd(u, Splitting::CrosscapRotation)?;
    let mut disk = harmonic_extend(&even.trace_at(u.half_length));
    disk.pulled = Some(Pullback {
        source: odd,
        map: LogMap::Outward,
    });
    Ok(disk)
}

/// Refined extension for a handle: disks at p (t = -L end) and q (t = +L end, local
/// angle reflected about `alpha`), both of radius `eps`.
pub fn refined_extend_handle(u: &CylinderField, alpha: f64, eps: f64) -> Result<(DiskField, DiskField)> {
    if u.kind != NeckKind::Handle {
        return Err(Error::InvalidInput("expected a handle neck field".into()));
    }
    let (even, odd) = split_even_odd(u, Splitting::HandleReflection)?;
    let l = u.half_length;
    let mut dp = harmonic_extend(&even.trace_at(-l)).with_radius(eps);
    dp.pulled = Some(Pullback {
        source: odd.clone(),
        map: LogMap::Inward,
    });
    let mut dq = harmonic_extend(&even.trace_at(l))
        .with_radius(eps)
        .with_angle_map(AngleMap::Reflect(alpha));
    dq.pulled = Some(Pullback {
        source: odd,
        map: LogMap::Outward,
    });
    Ok((dp, dq))
}

/// One row of the per-mode extension certificate.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ModeCheck {
    pub k: u32,
    pub half_length: f64,
    pub disk_energy: f64,
    pub cylinder_energy: f64,
    pub ratio: f64,
    pub coth: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Energy of the harmonic extension of e^{ik theta} by Gauss–Legendre in rho (exact for
/// the polynomial integrand), independent of the closed form.
pub fn harmonic_mode_energy_quadrature(k: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    let n = k as usize + 1;
    2.0 * PI * integrate(0.0, 1.0, n, |r| 2.0 * kf * kf * r.powi(2 * k as i32 - 1))
}

/// Energy of the cylinder minimizer cosh(kt)/cosh(kL) on [0, L] by composite
/// Gauss–Legendre (panels of width at most 1/(2k)).
pub fn cylinder_mode_energy_quadrature(k: u32, half_length: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    let panels = ((2.0 * kf * half_length).ceil() as usize).max(1);
    let h = half_length / panels as f64;
    let (x, w) = gauss_legendre(8);
    let ch = (kf * half_length).cosh();
    let mut total = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wi) in x.iter().zip(&w) {
            let t = c + r * xi;
            let u = (kf * t).cosh() / ch;
            let du = kf * (kf * t).sinh() / ch;
            total += wi * r * (du * du + kf * kf * u * u);
        }
    }
    2.0 * PI * total
}

/// Per-mode check that energy(H)/min-cylinder-energy equals coth(kL) and respects
/// the bound 1 + 2 e^{-2L} / (1 - e^{-2L}).
pub fn verify_extension_modes(max_k: u32, lengths: &[f64], tol: f64) -> Vec<ModeCheck> {
    let mut rows = Vec::new();
    for &l in lengths {
        let bound = 1.0 + 2.0 * (-2.0 * l).exp() / (1.0 - (-2.0 * l).exp());
        for k in 1..=max_k {
            let disk = harmonic_mode_energy_quadrature(k);
            let cyl = cylinder_mode_energy_quadrature(k, l);
            let ratio = disk / cyl;
            let coth = 1.0 / (k as f64 * l).tanh();
            let pass = (ratio - coth).abs() <= tol * coth && ratio <= bound * (1.0 + tol);
            rows.push(ModeCheck {
                k,
                half_length: l,
                disk_energy: disk,
                cylinder_energy: cyl,
                ratio,
                coth,
                bound,
                pass,
            });
        }
    }
    rows
}

/// CSV rendering of the mode checks.
pub fn mode_checks_csv(rows: &[ModeCheck]) -> String {
    let mut s = String::from("k,L,disk_energy,cylinder_energy,ratio,coth_kL,bound,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            r.k, r.half_length, r.disk_energy, r.cylinder_energy, r.ratio, r.coth, r.bound, r.pass
        ));
    }
    s
}
