//! Dirac-GAN drift field.
//!
//! The state is the reparameterized pair (φ, θ̃) where φ is the linear
//! discriminator slope and θ̃ = θ − c is the generator point mass relative to
//! the data location c. In these coordinates the drift is
//!
//! ```text
//! dφ/dt = h1′(φc)·c + h2′(φ(θ̃+c))·(θ̃+c)
//! dθ̃/dt = h3′(φ(θ̃+c))·φ
//! ```
//!
//! and every shipped family has its equilibrium at the origin. Derivatives
//! h1′, h2′, h3′ are supplied analytically per family so that conservation
//! properties are exact rather than approximate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sigmoid σ(x) = 1/(1+e^{-x}).
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Lipschitz constant declared for a constant derivative. The smoothness
/// assumption requires strictly positive constants, and any positive value
/// satisfies the inequality vacuously when the derivative is constant.
pub const ALPHA_FLOOR: f64 = 1e-9;

/// Identifies a shipped (h1, h2, h3) family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    /// h1(t) = t, h2(t) = −t, h3(t) = t. The drift is a pure rotation field.
    WganLinear,
    /// h1(t) = log σ(t), h2(t) = log σ(−t), h3(t) = log σ(t): the
    /// non-saturating standard GAN.
    GanLogSigmoid,
}

/// An (h1, h2, h3) function family given by its derivatives, plus the
/// Lipschitz constants (α1, α2, α3) declared for those derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFamily {
    pub kind: HKind,
    pub alphas: [f64; 3],
}

impl HFamily {
    pub fn wgan_linear() -> Self {
        Self {
            kind: HKind::WganLinear,
            alphas: [ALPHA_FLOOR; 3],
        }
    }

    pub fn gan_logsigmoid() -> Self {
        // |d/dx σ(±x)| ≤ 1/4.
        Self {
            kind: HKind::GanLogSigmoid,
            alphas: [0.25; 3],
        }
    }

    pub fn from_kind(kind: HKind) -> Self {
        match kind {
            HKind::WganLinear => Self::wgan_linear(),
            HKind::GanLogSigmoid => Self::gan_logsigmoid(),
        }
    }

    #[inline]
    pub fn h1_prime(&self, x: f64) -> f64 {
        match self.kind {
            HKind::WganLinear => 1.0,
            HKind::GanLogSigmoid => sigmoid(-x),
        }
    }

    #[inline]
    pub fn h2_prime(&self, x: f64) -> f64 {
        match self.kind {
            HKind::WganLinear => -1.0,
            HKind::GanLogSigmoid => -sigmoid(x),
        }
    }

    #[inline]
    pub fn h3_prime(&self, x: f64) -> f64 {
        match self.kind {
            HKind::WganLinear => 1.0,
            HKind::GanLogSigmoid => sigmoid(-x),
        }
    }

    fn prime(&self, which: usize, x: f64) -> f64 {
        match which {
            0 => self.h1_prime(x),
            1 => self.h2_prime(x),
            _ => self.h3_prime(x),
        }
    }
}

/// The 2-D autonomous system: a family plus the true data location c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub family: HFamily,
    pub c: f64,
}

impl SystemSpec {
    pub fn new(family: HFamily, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "data location c must be finite, got {c}"
            )));
        }
        Ok(Self { family, c })
    }
}

/// Reparameterized state (φ, θ̃).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Discriminator slope φ.
    pub disc: f64,
    /// Generator point mass relative to the data location, θ̃ = θ − c.
    pub gen: f64,
}

impl State {
    pub fn new(disc: f64, gen: f64) -> Self {
        Self { disc, gen }
    }

    pub const ZERO: State = State {
        disc: 0.0,
        gen: 0.0,
    };

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.disc.is_finite() && self.gen.is_finite()
    }

    /// Euclidean norm. Falls back to the scaled form when the squared sum
    /// overflows (components beyond ~1e154).
    #[inline]
    pub fn norm(&self) -> f64 {
        let q = self.disc * self.disc + self.gen * self.gen;
        if q.is_finite() {
            q.sqrt()
        } else {
            self.disc.hypot(self.gen)
        }
    }

    #[inline]
    pub fn dot(&self, other: &State) -> f64 {
        self.disc * other.disc + self.gen * other.gen
    }

    #[inline]
    pub fn scale(&self, k: f64) -> State {
        State::new(k * self.disc, k * self.gen)
    }
}

/// Evaluates the drift f(X) at `x`.
pub fn drift(spec: &SystemSpec, x: State) -> Result<State> {
    if !x.is_finite() {
        return Err(Error::NonFiniteState {
            disc: x.disc,
            gen: x.gen,
        });
    }
    let c = spec.c;
    let theta = x.gen + c;
    let pre = x.disc * theta;
    let f = &spec.family;
    Ok(State::new(
        f.h1_prime(x.disc * c) * c + f.h2_prime(pre) * theta,
        f.h3_prime(pre) * x.disc,
    ))
}

/// One grid point of a sampled drift field: position and drift vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Samples the drift on a `resolution` × `resolution` grid over
/// `x_range` × `y_range` (x = φ, y = θ̃), row-major with y as the row index.
pub fn gradient_field(
    spec: &SystemSpec,
    x_range: (f64, f64),
    y_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<FieldSample>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    for (lo, hi) in [x_range, y_range] {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "degenerate range [{lo}, {hi}]"
            )));
        }
    }
    let lerp = |lo: f64, hi: f64, i: usize| {
        lo + (hi - lo) * (i as f64) / ((resolution - 1) as f64)
    };
    let mut out = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        let y = lerp(y_range.0, y_range.1, iy);
        for ix in 0..resolution {
            let x = lerp(x_range.0, x_range.1, ix);
            let d = drift(spec, State::new(x, y))?;
            out.push(FieldSample {
                x,
                y,
                dx: d.disc,
                dy: d.gen,
            });
        }
    }
    Ok(out)
}

/// Observed Lipschitz ratios of (h1′, h2′, h3′) against the declared constants.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzReport {
    pub observed: [f64; 3],
    pub declared: [f64; 3],
}

impl LipschitzReport {
    /// True when every observed ratio is within the declared constant plus
    /// a 1e−9 slack for rounding.
    pub fn passes(&self) -> bool {
        self.observed
            .iter()
            .zip(self.declared.iter())
            .all(|(o, d)| *o <= *d + 1e-9)
    }
}

/// Max |hᵢ′(x) − hᵢ′(y)| / |x − y| over all distinct pairs of `samples`
/// evenly spaced points on `domain`.
pub fn lipschitz_check(
    family: &HFamily,
    domain: (f64, f64),
    samples: usize,
) -> Result<LipschitzReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let (lo, hi) = domain;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "degenerate domain [{lo}, {hi}]"
        )));
    }
    let xs: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * (i as f64) / ((samples - 1) as f64))
        .collect();
    let mut observed = [0.0f64; 3];
    for which in 0..3 {
        let vals: Vec<f64> = xs.iter().map(|&x| family.prime(which, x)).collect();
        let mut best = 0.0f64;
        for i in 0..samples {
            for j in (i + 1)..samples {
                let ratio = (vals[i] - vals[j]).abs() / (xs[i] - xs[j]).abs();
                if ratio > best {
                    best = ratio;
                }
            }
        }
        observed[which] = best;
    }
    Ok(LipschitzReport {
        observed,
        declared: family.alphas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wgan_spec(c: f64) -> SystemSpec {
        SystemSpec::new(HFamily::wgan_linear(), c).unwrap()
    }

    #[test]
    fn wgan_drift_by_direct_substitution() {
        // c=1, x=(0.5, 0.3): dφ = 1·1 + (−1)·1.3 = −0.3, dθ̃ = 1·0.5 = 0.5
        let d = drift(&wgan_spec(1.0), State::new(0.5, 0.3)).unwrap();
        assert_eq!(d.disc, 1.0 - 1.3);
        assert!((d.disc + 0.3).abs() < 1e-15);
        assert_eq!(d.gen, 0.5);
    }

    #[test]
    fn origin_is_an_equilibrium() {
        for c in [-2.0, 0.0, 1.0, 3.5] {
            let d = drift(&wgan_spec(c), State::ZERO).unwrap();
            assert_eq!((d.disc, d.gen), (0.0, 0.0));
            let spec = SystemSpec::new(HFamily::gan_logsigmoid(), c).unwrap();
            let d = drift(&spec, State::ZERO).unwrap();
            assert_eq!(d.gen, 0.0);
            // For the saturating family dφ(0,0) = c·σ(0) − σ(0)·c = 0.
            assert!(d.disc.abs() < 1e-15, "dφ at origin: {}", d.disc);
        }
    }

    #[test]
    fn wgan_drift_is_perpendicular_to_state() {
        // ⟨x, f(x)⟩ = 0 exactly for the linear family.
        let spec = wgan_spec(1.0);
        let mut s = crate::noise::NoiseStream::new(31, 0);
        for _ in 0..100 {
            let x = State::new(4.0 * s.normal(), 4.0 * s.normal());
            let d = drift(&spec, x).unwrap();
            assert!(x.dot(&d).abs() < 1e-12 * x.norm() * d.norm().max(1.0));
        }
    }

    #[test]
    fn drift_rejects_non_finite_state() {
        let e = drift(&wgan_spec(1.0), State::new(f64::NAN, 0.0));
        assert!(matches!(e, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn field_matches_pointwise_drift_and_center_vanishes() {
        let spec = wgan_spec(1.0);
        let field = gradient_field(&spec, (-1.0, 1.0), (-1.0, 1.0), 3).unwrap();
        assert_eq!(field.len(), 9);
        let center = field[4];
        assert_eq!((center.x, center.y), (0.0, 0.0));
        assert_eq!((center.dx, center.dy), (0.0, 0.0));
        for s in &field {
            let d = drift(&spec, State::new(s.x, s.y)).unwrap();
            assert_eq!((d.disc, d.gen), (s.dx, s.dy));
            // Pure rotation: every vector perpendicular to its position.
            assert!(s.x * s.dx + s.y * s.dy < 1e-12);
        }
    }

    #[test]
    fn field_rejects_degenerate_ranges() {
        let spec = wgan_spec(1.0);
        assert!(gradient_field(&spec, (1.0, 1.0), (-1.0, 1.0), 3).is_err());
        assert!(gradient_field(&spec, (-1.0, 1.0), (2.0, -2.0), 3).is_err());
        assert!(gradient_field(&spec, (-1.0, 1.0), (-1.0, 1.0), 1).is_err());
    }

    #[test]
    fn lipschitz_constant_families_observe_zero() {
        let rep = lipschitz_check(&HFamily::wgan_linear(), (-10.0, 10.0), 1000).unwrap();
        assert_eq!(rep.observed, [0.0; 3]);
        assert!(rep.passes());
    }

    #[test]
    fn lipschitz_logsigmoid_bounded_by_quarter() {
        let rep = lipschitz_check(&HFamily::gan_logsigmoid(), (-10.0, 10.0), 1000).unwrap();
        for o in rep.observed {
            assert!(o <= 0.25 + 1e-9, "ratio {o}");
            assert!(o > 0.2, "sampling should get close to the 1/4 bound: {o}");
        }
        assert!(rep.passes());
    }

    #[test]
    fn lipschitz_single_pair_ratio() {
        // Two samples on [0,1]: ratio = |h1′(0) − h1′(1)| = |σ(0) − σ(-1)| ≈ 0.2311.
        let rep = lipschitz_check(&HFamily::gan_logsigmoid(), (0.0, 1.0), 2).unwrap();
        let expected = sigmoid(0.0) - sigmoid(-1.0);
        assert!((rep.observed[0] - expected).abs() < 1e-12);
        assert!((expected - 0.2311).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn drift_is_pure(disc in -10.0..10.0f64, gen in -10.0..10.0f64, c in -2.0..2.0f64) {
            let spec = SystemSpec::new(HFamily::gan_logsigmoid(), c).unwrap();
            let x = State::new(disc, gen);
            let a = drift(&spec, x).unwrap();
            let b = drift(&spec, x).unwrap();
            prop_assert_eq!(a.disc.to_bits(), b.disc.to_bits());
            prop_assert_eq!(a.gen.to_bits(), b.gen.to_bits());
        }

        #[test]
        fn wgan_conservation_everywhere(disc in -100.0..100.0f64, gen in -100.0..100.0f64) {
            let spec = SystemSpec::new(HFamily::wgan_linear(), 1.0).unwrap();
            let x = State::new(disc, gen);
            let d = drift(&spec, x).unwrap();
            prop_assert!(x.dot(&d).abs() <= 1e-12 * (1.0 + x.norm() * d.norm()));
        }
    }
}
