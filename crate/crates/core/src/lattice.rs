//! Integer frequency lattice, frequency lines through the origin and the
//! rational cone that selects admissible line directions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational number used for line directions and cone apertures.
pub type Rational = Ratio<i64>;

/// A rational direction triple `q ∈ ℚ³`.
pub type RationalTriple = [Rational; 3];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("line direction {0} has vanishing vertical component; its modes all sit on k3 = 0")]
    DegenerateLine(FrequencyVector),
    #[error("cone aperture must be positive, got {0}")]
    NonpositiveAperture(Rational),
    #[error("rational overflow while canonicalizing {0:?}")]
    Overflow(RationalTriple),
}

/// A wavenumber `k ∈ ℤ³`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
}

impl FrequencyVector {
    pub const ZERO: Self = Self::new(0, 0, 0);

    pub const fn new(k1: i64, k2: i64, k3: i64) -> Self {
        Self { k1, k2, k3 }
    }

    pub fn as_array(&self) -> [i64; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// `|k|²`, exact.
    pub fn norm_sq(&self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2 + self.k3 * self.k3
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Largest absolute component, the cube-truncation radius needed to hold `k`.
    pub fn max_abs(&self) -> i64 {
        self.k1.abs().max(self.k2.abs()).max(self.k3.abs())
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.k1 * other.k1 + self.k2 * other.k2 + self.k3 * other.k3
    }
}

impl From<[i64; 3]> for FrequencyVector {
    fn from(k: [i64; 3]) -> Self {
        Self::new(k[0], k[1], k[2])
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k1, self.k2, self.k3)
    }
}

impl Add for FrequencyVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.k1 + o.k1, self.k2 + o.k2, self.k3 + o.k3)
    }
}

impl Sub for FrequencyVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.k1 - o.k1, self.k2 - o.k2, self.k3 - o.k3)
    }
}

impl Neg for FrequencyVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.k1, -self.k2, -self.k3)
    }
}

impl Mul<FrequencyVector> for i64 {
    type Output = FrequencyVector;
    fn mul(self, k: FrequencyVector) -> FrequencyVector {
        FrequencyVector::new(self * k.k1, self * k.k2, self * k.k3)
    }
}

/// A frequency line `L(q) = ℤ³ ∩ ℚq`, stored by its primitive direction.
///
/// `p` has coprime components and a positive first nonzero entry, so two
/// lines are equal exactly when their `p` agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpec {
    p: FrequencyVector,
    q: RationalTriple,
}

impl LineSpec {
    /// Primitive integer direction.
    pub fn direction(&self) -> FrequencyVector {
        self.p
    }

    /// The rational triple the line was built from.
    pub fn origin_triple(&self) -> &RationalTriple {
        &self.q
    }

    /// Lines with `p3 = 0` only carry `k3 = 0` modes and are excluded from dynamics.
    pub fn is_degenerate(&self) -> bool {
        self.p.k3 == 0
    }

    pub fn require_admissible(&self) -> Result<&Self, LatticeError> {
        if self.is_degenerate() {
            Err(LatticeError::DegenerateLine(self.p))
        } else {
            Ok(self)
        }
    }

    /// The lattice point `n·p`.
    pub fn mode(&self, n: i64) -> FrequencyVector {
        n * self.p
    }
}

/// Builds the line through the origin spanned by `q`.
pub fn canonicalize_line(q: RationalTriple) -> Result<LineSpec, LatticeError> {
    if q.iter().all(|c| c.is_zero()) {
        return Err(LatticeError::ZeroDirection);
    }
    // Common denominator, then strip the common factor of the numerators.
    let lcm = q
        .iter()
        .try_fold(1i64, |acc, c| {
            let d = *c.denom();
            let g = acc.gcd(&d);
            (acc / g).checked_mul(d)
        })
        .ok_or(LatticeError::Overflow(q))?;
    let mut ints = [0i64; 3];
    for (dst, c) in ints.iter_mut().zip(q.iter()) {
        *dst = c
            .numer()
            .checked_mul(lcm / c.denom())
            .ok_or(LatticeError::Overflow(q))?;
    }
    let g = ints.iter().fold(0i64, |acc, v| acc.gcd(v));
    for v in ints.iter_mut() {
        *v /= g;
    }
    let lead = ints.iter().copied().find(|v| *v != 0).unwrap_or(1);
    if lead < 0 {
        for v in ints.iter_mut() {
            *v = -*v;
        }
    }
    Ok(LineSpec {
        p: FrequencyVector::from(ints),
        q,
    })
}

/// Canonical line through an integer direction.
pub fn line_from_integers(p: [i64; 3]) -> Result<LineSpec, LatticeError> {
    canonicalize_line(p.map(Rational::from_integer))
}

/// `true` iff `k = n·p` for some integer `n`.
pub fn line_contains(line: &LineSpec, k: FrequencyVector) -> bool {
    line_index(line, k).is_some()
}

/// The integer `n` with `k = n·p`, if one exists.
pub fn line_index(line: &LineSpec, k: FrequencyVector) -> Option<i64> {
    let p = line.p.as_array();
    let k = k.as_array();
    let mut n: Option<i64> = None;
    for (pi, ki) in p.iter().zip(k.iter()) {
        if *pi == 0 {
            if *ki != 0 {
                return None;
            }
            continue;
        }
        if ki % pi != 0 {
            return None;
        }
        let m = ki / pi;
        match n {
            Some(prev) if prev != m => return None,
            _ => n = Some(m),
        }
    }
    // p ≠ 0, so n has been set.
    n
}

/// Largest `n ≥ 0` with `|n·pᵢ| ≤ radius` for every component.
pub fn max_line_index(line: &LineSpec, radius: i64) -> i64 {
    radius / line.p.max_abs()
}

/// All nonzero `n` with `n·p` inside the cube `|kᵢ| ≤ radius`, in increasing order.
pub fn line_modes(line: &LineSpec, radius: i64) -> Vec<i64> {
    let m = max_line_index(line, radius);
    (-m..=m).filter(|n| *n != 0).collect()
}

/// The rational cone `K_C = { q : |q1|, |q3| ≤ C|q2| }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    aperture: Rational,
}

impl ConeSpec {
    pub fn new(aperture: Rational) -> Result<Self, LatticeError> {
        if aperture <= Rational::zero() {
            return Err(LatticeError::NonpositiveAperture(aperture));
        }
        Ok(Self { aperture })
    }

    pub fn aperture(&self) -> Rational {
        self.aperture
    }
}

pub fn cone_contains(cone: &ConeSpec, q: &RationalTriple) -> Result<bool, LatticeError> {
    if q.iter().all(|c| c.is_zero()) {
        return Err(LatticeError::ZeroDirection);
    }
    let bound = cone.aperture * q[1].abs();
    Ok(q[0].abs() <= bound && q[2].abs() <= bound)
}

/// Parses `"a"`, `"a/b"` or a decimal-free integer into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ints(v: [i64; 3]) -> RationalTriple {
        v.map(Rational::from_integer)
    }

    #[test]
    fn canonicalize_clears_denominators() {
        let l = canonicalize_line([r(2, 3), r(4, 3), r(2, 3)]).unwrap();
        assert_eq!(l.direction(), FrequencyVector::new(1, 2, 1));
        let l = canonicalize_line(ints([0, 1, 1])).unwrap();
        assert_eq!(l.direction(), FrequencyVector::new(0, 1, 1));
        assert_eq!(
            canonicalize_line(ints([0, 0, 0])),
            Err(LatticeError::ZeroDirection)
        );
    }

    #[test]
    fn canonical_sign_is_positive_leading() {
        let l = canonicalize_line(ints([-2, 4, -6])).unwrap();
        assert_eq!(l.direction(), FrequencyVector::new(1, -2, 3));
        let l = canonicalize_line(ints([0, -3, 3])).unwrap();
        assert_eq!(l.direction(), FrequencyVector::new(0, 1, -1));
    }

    #[test]
    fn degenerate_lines_are_flagged() {
        let l = canonicalize_line(ints([1, 1, 0])).unwrap();
        assert!(l.is_degenerate());
        assert!(matches!(
            l.require_admissible(),
            Err(LatticeError::DegenerateLine(_))
        ));
        assert!(line_from_integers([1, 1, 1]).unwrap().require_admissible().is_ok());
    }

    #[test]
    fn cone_membership() {
        let c1 = ConeSpec::new(r(1, 1)).unwrap();
        let c3 = ConeSpec::new(r(3, 1)).unwrap();
        assert!(cone_contains(&c1, &ints([1, 1, 1])).unwrap());
        assert!(!cone_contains(&c1, &ints([2, 1, 1])).unwrap());
        assert!(cone_contains(&c3, &ints([2, 1, 1])).unwrap());
        assert_eq!(
            cone_contains(&c1, &ints([0, 0, 0])),
            Err(LatticeError::ZeroDirection)
        );
        assert!(matches!(
            ConeSpec::new(r(0, 1)),
            Err(LatticeError::NonpositiveAperture(_))
        ));
    }

    #[test]
    fn containment() {
        let l = line_from_integers([1, 1, 1]).unwrap();
        assert!(line_contains(&l, FrequencyVector::new(3, 3, 3)));
        assert!(!line_contains(&l, FrequencyVector::new(1, 2, 1)));
        assert!(line_contains(&l, FrequencyVector::ZERO));
        let l = line_from_integers([0, 1, 2]).unwrap();
        assert!(line_contains(&l, FrequencyVector::new(0, -2, -4)));
        assert!(!line_contains(&l, FrequencyVector::new(1, 2, 4)));
    }

    #[test]
    fn modes_inside_cube() {
        let l = line_from_integers([1, 1, 1]).unwrap();
        assert_eq!(line_modes(&l, 4), vec![-4, -3, -2, -1, 1, 2, 3, 4]);
        let l = line_from_integers([0, 1, 1]).unwrap();
        assert_eq!(line_modes(&l, 4), vec![-4, -3, -2, -1, 1, 2, 3, 4]);
        let l = line_from_integers([1, 2, 1]).unwrap();
        assert_eq!(line_modes(&l, 4), vec![-2, -1, 1, 2]);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("2/3"), Some(r(2, 3)));
        assert_eq!(parse_rational(" -4 "), Some(r(-4, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-12i64..=12, 1i64..=9).prop_map(|(n, d)| Rational::new(n, d))
    }

    fn nonzero_triple() -> impl Strategy<Value = RationalTriple> {
        [rational(), rational(), rational()].prop_filter("nonzero", |q| q.iter().any(|c| !c.is_zero()))
    }

    proptest! {
        #[test]
        fn closure_under_addition(q in nonzero_triple(), radius in 1i64..12) {
            let l = canonicalize_line(q).unwrap();
            let modes = line_modes(&l, radius);
            for a in &modes {
                for b in &modes {
                    prop_assert!(line_contains(&l, (a + b) * l.direction()));
                }
            }
        }

        #[test]
        fn cone_is_scale_invariant(q in nonzero_triple(), lam in rational(), c in 1i64..6) {
            prop_assume!(!lam.is_zero());
            let cone = ConeSpec::new(Rational::new(c, 2)).unwrap();
            let scaled = q.map(|x| x * lam);
            prop_assert_eq!(cone_contains(&cone, &q).unwrap(), cone_contains(&cone, &scaled).unwrap());
        }

        #[test]
        fn canonicalize_is_idempotent(q in nonzero_triple()) {
            let l = canonicalize_line(q).unwrap();
            let again = line_from_integers(l.direction().as_array()).unwrap();
            prop_assert_eq!(again.direction(), l.direction());
        }

        #[test]
        fn original_direction_lies_on_line(q in nonzero_triple()) {
            let l = canonicalize_line(q).unwrap();
            // Every integer multiple of q that is a lattice point is a multiple of p.
            let k = {
                let d = q.iter().fold(1i64, |acc, c| acc.lcm(c.denom()));
                FrequencyVector::from(q.map(|c| (c * Rational::from_integer(d)).to_integer()))
            };
            prop_assert!(line_contains(&l, k));
        }
    }
}
