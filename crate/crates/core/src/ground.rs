//! Finite-dimensional ground normed spaces `C^k`.
//!
//! Every catalog member has a closed-form norm and a closed-form dual norm
//! under the bilinear pairing `f(v) = Σ f_i v_i`. Dual spaces are resolved
//! to a canonical [`Kind`] at evaluation time.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{CMatrix, C64, ZERO};

/// Exponent of an `l_p` ground.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PExp {
    One,
    Two,
    Inf,
}

impl Serialize for PExp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExp::One => s.serialize_u8(1),
            PExp::Two => s.serialize_u8(2),
            PExp::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) if n.as_u64() == Some(1) => Ok(PExp::One),
            serde_json::Value::Number(n) if n.as_u64() == Some(2) => Ok(PExp::Two),
            serde_json::Value::String(s) if s == "inf" => Ok(PExp::Inf),
            other => Err(D::Error::custom(format!("p must be 1, 2 or \"inf\", got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroundSpace {
    Lp {
        p: PExp,
        dim: usize,
    },
    /// `C^{a b}` read row-major as `M_{a,b}` with the operator norm.
    Opmatrix {
        a: usize,
        b: usize,
    },
    Dual {
        base: Box<GroundSpace>,
    },
}

/// Canonical norm after resolving duals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    L1(usize),
    L2(usize),
    Linf(usize),
    Op { a: usize, b: usize },
    Nuclear { a: usize, b: usize },
}

impl GroundSpace {
    pub fn l1(dim: usize) -> Self {
        GroundSpace::Lp { p: PExp::One, dim }
    }
    pub fn l2(dim: usize) -> Self {
        GroundSpace::Lp { p: PExp::Two, dim }
    }
    pub fn linf(dim: usize) -> Self {
        GroundSpace::Lp { p: PExp::Inf, dim }
    }
    pub fn opmatrix(a: usize, b: usize) -> Self {
        GroundSpace::Opmatrix { a, b }
    }
    pub fn dual_of(base: GroundSpace) -> Self {
        GroundSpace::Dual { base: Box::new(base) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroundSpace::Lp { dim, .. } if *dim == 0 => {
                Err(Error::Descriptor("ground dimension must be positive".into()))
            }
            GroundSpace::Opmatrix { a, b } if *a == 0 || *b == 0 => {
                Err(Error::Descriptor("opmatrix sizes must be positive".into()))
            }
            GroundSpace::Dual { base } => base.validate(),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.kind().dim()
    }

    pub fn kind(&self) -> Kind {
        match self {
            GroundSpace::Lp { p: PExp::One, dim } => Kind::L1(*dim),
            GroundSpace::Lp { p: PExp::Two, dim } => Kind::L2(*dim),
            GroundSpace::Lp { p: PExp::Inf, dim } => Kind::Linf(*dim),
            GroundSpace::Opmatrix { a, b } => Kind::Op { a: *a, b: *b },
            GroundSpace::Dual { base } => base.kind().dual(),
        }
    }
}

fn reshape(v: &[C64], a: usize, b: usize) -> CMatrix {
    CMatrix::new(a, b, v.to_vec()).expect("length checked by caller")
}

impl Kind {
    pub fn dim(&self) -> usize {
        match *self {
            Kind::L1(k) | Kind::L2(k) | Kind::Linf(k) => k,
            Kind::Op { a, b } | Kind::Nuclear { a, b } => a * b,
        }
    }

    pub fn dual(&self) -> Kind {
        match *self {
            Kind::L1(k) => Kind::Linf(k),
            Kind::L2(k) => Kind::L2(k),
            Kind::Linf(k) => Kind::L1(k),
            Kind::Op { a, b } => Kind::Nuclear { a, b },
            Kind::Nuclear { a, b } => Kind::Op { a, b },
        }
    }

    /// Collapses kinds that coincide with `l_2` (row and column matrices,
    /// one-dimensional spaces).
    pub fn canonical(&self) -> Kind {
        match *self {
            Kind::Op { a, b } | Kind::Nuclear { a, b } if a.min(b) == 1 => Kind::L2(a * b),
            Kind::L1(1) | Kind::Linf(1) => Kind::L2(1),
            k => k,
        }
    }

    /// True when the space is one-dimensional, i.e. a copy of `C`.
    pub fn is_scalar(&self) -> bool {
        self.dim() == 1
    }

    pub fn norm(&self, v: &[C64]) -> f64 {
        match *self {
            Kind::L1(_) => v.iter().map(|z| z.norm()).sum(),
            Kind::L2(_) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Kind::Linf(_) => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Kind::Op { a, b } => crate::matcore::op_norm(&reshape(v, a, b)),
            Kind::Nuclear { a, b } => crate::matcore::nuclear_norm(&reshape(v, a, b)),
        }
    }

    /// A functional `f` in the dual unit ball with `Σ f_i v_i = ‖v‖`.
    pub fn norming(&self, v: &[C64]) -> Vec<C64> {
        let phase = |z: C64| if z.norm() > 0.0 { z.conj() / z.norm() } else { ZERO };
        match *self {
            Kind::L1(_) => v.iter().map(|&z| phase(z)).collect(),
            Kind::L2(_) => {
                let n = self.norm(v);
                if n == 0.0 {
                    vec![ZERO; v.len()]
                } else {
                    v.iter().map(|z| z.conj() / n).collect()
                }
            }
            Kind::Linf(_) => {
                let mut f = vec![ZERO; v.len()];
                if let Some((i, _)) = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) {
                    f[i] = phase(v[i]);
                }
                f
            }
            Kind::Op { a, b } => {
                let m = reshape(v, a, b);
                let svd = m.svd();
                if svd.s[0] == 0.0 {
                    return vec![ZERO; v.len()];
                }
                let u = svd.u.column(0);
                let w_t = svd.v_t.row(0);
                let mut f = Vec::with_capacity(a * b);
                for ui in &u {
                    for wj in &w_t {
                        // w = conj(first row of v_t)
                        f.push(ui.conj() * wj.conj());
                    }
                }
                f
            }
            Kind::Nuclear { a, b } => {
                let m = reshape(v, a, b);
                let svd = m.svd();
                let mut f = vec![ZERO; a * b];
                let smax = svd.s[0];
                for (r, &s) in svd.s.iter().enumerate() {
                    if s <= 1e-14 * smax || s == 0.0 {
                        continue;
                    }
                    let u = svd.u.column(r);
                    let w_t = svd.v_t.row(r);
                    for i in 0..a {
                        for j in 0..b {
                            f[i * b + j] += u[i].conj() * w_t[j].conj();
                        }
                    }
                }
                f
            }
        }
    }

    /// Constants `(lo, hi)` with `lo ‖v‖_2 ≤ ‖v‖ ≤ hi ‖v‖_2`.
    pub fn l2_equivalence(&self) -> (f64, f64) {
        match *self {
            Kind::L1(k) => (1.0, (k as f64).sqrt()),
            Kind::L2(_) => (1.0, 1.0),
            Kind::Linf(k) => (1.0 / (k as f64).sqrt(), 1.0),
            Kind::Op { a, b } => (1.0 / (a.min(b) as f64).sqrt(), 1.0),
            Kind::Nuclear { a, b } => (1.0, (a.min(b) as f64).sqrt()),
        }
    }
}

fn check_len(e: &GroundSpace, v: &[C64]) -> Result<()> {
    if v.len() != e.dim() {
        return dim_err(format!("vector of length {} in a ground of dimension {}", v.len(), e.dim()));
    }
    Ok(())
}

/// Ground norm of `v`.
pub fn g_norm(e: &GroundSpace, v: &[C64]) -> Result<f64> {
    check_len(e, v)?;
    Ok(e.kind().norm(v))
}

/// Dual norm of the functional `f` under the bilinear pairing.
pub fn g_dual_norm(e: &GroundSpace, f: &[C64]) -> Result<f64> {
    check_len(e, f)?;
    Ok(e.kind().dual().norm(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_vec(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
        (0..k).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn catalog() -> Vec<GroundSpace> {
        vec![
            GroundSpace::l1(3),
            GroundSpace::l2(3),
            GroundSpace::linf(3),
            GroundSpace::opmatrix(2, 2),
            GroundSpace::opmatrix(2, 3),
            GroundSpace::dual_of(GroundSpace::opmatrix(2, 2)),
            GroundSpace::dual_of(GroundSpace::l1(4)),
        ]
    }

    #[test]
    fn norm_examples() {
        assert_eq!(g_norm(&GroundSpace::l2(2), &[c(3.0), c(4.0)]).unwrap(), 5.0);
        assert_eq!(g_norm(&GroundSpace::linf(2), &[c(1.0), c(-2.0)]).unwrap(), 2.0);
        let v = [c(3.0), c(0.0), c(0.0), c(1.0)];
        assert!((g_norm(&GroundSpace::opmatrix(2, 2), &v).unwrap() - 3.0).abs() < 1e-12);
        assert!(g_norm(&GroundSpace::l2(3), &[c(1.0)]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        assert_eq!(g_dual_norm(&GroundSpace::l1(2), &[c(1.0), c(-1.0)]).unwrap(), 1.0);
        assert_eq!(g_dual_norm(&GroundSpace::l2(2), &[c(3.0), c(4.0)]).unwrap(), 5.0);
        let id = [c(1.0), c(0.0), c(0.0), c(1.0)];
        assert!((g_dual_norm(&GroundSpace::opmatrix(2, 2), &id).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn double_dual_is_reflexive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for e in catalog() {
            let dd = GroundSpace::dual_of(GroundSpace::dual_of(e.clone()));
            for _ in 0..20 {
                let v = random_vec(&mut rng, e.dim());
                assert!((g_norm(&e, &v).unwrap() - g_norm(&dd, &v).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn norming_functional_attains_the_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for e in catalog() {
            let k = e.kind();
            for _ in 0..50 {
                let v = random_vec(&mut rng, e.dim());
                let f = k.norming(&v);
                let pair: C64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((pair.re - k.norm(&v)).abs() < 1e-9 * (1.0 + k.norm(&v)), "{e:?}");
                assert!(pair.im.abs() < 1e-9);
                assert!(k.dual().norm(&f) <= 1.0 + 1e-9);
            }
        }
    }

    /// Hahn–Banach pinch: the norm equals the supremum of pairings over the
    /// dual unit ball. Sampled functionals never exceed it, and the sup over
    /// samples plus the norming functional reaches it.
    #[test]
    fn hahn_banach_pinch() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for e in catalog() {
            let k = e.kind();
            for _ in 0..5 {
                let v = random_vec(&mut rng, e.dim());
                let mut best: f64 = 0.0;
                for _ in 0..5000 {
                    let f = random_vec(&mut rng, e.dim());
                    let d = k.dual().norm(&f);
                    let p: C64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
                    let val = p.norm() / d;
                    assert!(val <= k.norm(&v) * (1.0 + 1e-9));
                    best = best.max(val);
                }
                let f = k.norming(&v);
                let p: C64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
                best = best.max(p.norm() / k.dual().norm(&f));
                assert!((best - k.norm(&v)).abs() <= 1e-9 * (1.0 + k.norm(&v)));
            }
        }
    }

    #[test]
    fn homogeneity_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for e in catalog() {
            let k = e.kind();
            for _ in 0..50 {
                let u = random_vec(&mut rng, e.dim());
                let v = random_vec(&mut rng, e.dim());
                let lam = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let su: Vec<C64> = u.iter().map(|z| z * lam).collect();
                assert!((k.norm(&su) - lam.norm() * k.norm(&u)).abs() < 1e-12 * (1.0 + k.norm(&su)));
                let w: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                assert!(k.norm(&w) <= k.norm(&u) + k.norm(&v) + 1e-12);
            }
        }
    }

    #[test]
    fn json_schema() {
        let e = GroundSpace::dual_of(GroundSpace::linf(3));
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"kind":"dual","base":{"kind":"lp","p":"inf","dim":3}}"#);
        let back: GroundSpace = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let op: GroundSpace = serde_json::from_str(r#"{"kind":"opmatrix","a":2,"b":3}"#).unwrap();
        assert_eq!(op.dim(), 6);
        assert!(serde_json::from_str::<GroundSpace>(r#"{"kind":"lp","p":3,"dim":2}"#).is_err());
    }
}
