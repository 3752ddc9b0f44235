//! Canonical forms for the rational fragment of [`ScalarExpr`].
//!
//! An expression is flattened into a single quotient `num/den` of expanded
//! multivariate polynomials over the rationals. The variables ("generators")
//! are the chart coordinates plus one opaque kernel per distinct
//! transcendental call (`sin`, `cos`, `exp`, argument already canonical).
//! Quotients are reduced by a multivariate GCD (primitive polynomial
//! remainder sequences over the integers) and the denominator is made monic,
//! so equal rational functions render to byte-identical trees.

use super::ScalarExpr;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Result of normalization: the canonical tree plus the domain caveats that
/// cancellation absorbed (each listed expression must stay nonzero for the
/// original and canonical trees to agree).
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub expr: ScalarExpr,
    pub caveats: Vec<ScalarExpr>,
    exactly_zero: bool,
}

impl Normalized {
    /// True when the normalized rational fragment is literally zero.
    pub fn is_exactly_zero(&self) -> bool {
        self.exactly_zero
    }
}

/// A polynomial generator: a coordinate or an opaque transcendental kernel
/// whose argument is a canonical tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Gen {
    Coord(u32),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Exp(ScalarExpr),
}

/// Exponent vector aligned with a generator list; graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Mono(Vec<u32>);

impl Mono {
    fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

type QTerms = BTreeMap<Mono, BigRational>;
type ZTerms = BTreeMap<Mono, BigInt>;

#[derive(Debug, Clone, PartialEq)]
struct Nf {
    gens: Vec<Gen>,
    num: QTerms,
    den: QTerms,
    caveats: Vec<ScalarExpr>,
}

pub(super) fn normalize(e: &ScalarExpr) -> Normalized {
    let nf = to_nf(e);
    let exactly_zero = nf.num.is_empty() && !nf.den.is_empty();
    let mut caveats = nf.caveats.clone();
    caveats.sort();
    caveats.dedup();
    Normalized {
        expr: render(&nf),
        caveats,
        exactly_zero,
    }
}

// ---------------------------------------------------------------------------
// polynomial arithmetic over a fixed generator list

fn q_zero() -> QTerms {
    BTreeMap::new()
}

fn q_const(c: BigRational, width: usize) -> QTerms {
    let mut t = BTreeMap::new();
    if !c.is_zero() {
        t.insert(Mono(vec![0; width]), c);
    }
    t
}

fn q_one(width: usize) -> QTerms {
    q_const(BigRational::one(), width)
}

fn q_gen(idx: usize, width: usize) -> QTerms {
    let mut exps = vec![0; width];
    exps[idx] = 1;
    let mut t = BTreeMap::new();
    t.insert(Mono(exps), BigRational::one());
    t
}

fn q_is_const(p: &QTerms) -> Option<BigRational> {
    if p.is_empty() {
        return Some(BigRational::zero());
    }
    if p.len() == 1 {
        let (m, c) = p.iter().next().unwrap();
        if m.total() == 0 {
            return Some(c.clone());
        }
    }
    None
}

fn q_add_assign(a: &mut QTerms, b: &QTerms) {
    for (m, c) in b {
        let entry = a.entry(m.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            a.remove(m);
        }
    }
}

fn q_neg(a: &QTerms) -> QTerms {
    a.iter().map(|(m, c)| (m.clone(), -c)).collect()
}

fn q_mul(a: &QTerms, b: &QTerms) -> QTerms {
    let mut out: QTerms = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = Mono(
                ma.0.iter()
                    .zip(&mb.0)
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>(),
            );
            let c = ca * cb;
            let entry = out.entry(m).or_insert_with(BigRational::zero);
            *entry += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn q_scale(a: &QTerms, c: &BigRational) -> QTerms {
    if c.is_zero() {
        return q_zero();
    }
    a.iter().map(|(m, k)| (m.clone(), k * c)).collect()
}

fn q_pow(a: &QTerms, mut k: u32, width: usize) -> QTerms {
    let mut base = a.clone();
    let mut acc = q_one(width);
    while k > 0 {
        if k & 1 == 1 {
            acc = q_mul(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = q_mul(&base, &base);
        }
    }
    acc
}

/// Exact multivariate division; `None` when `b` does not divide `a`.
fn q_div_exact(a: &QTerms, b: &QTerms) -> Option<QTerms> {
    assert!(!b.is_empty(), "division by zero polynomial");
    let (bm, bc) = b.iter().next_back().unwrap();
    let mut rem = a.clone();
    let mut quo: QTerms = BTreeMap::new();
    while !rem.is_empty() {
        let (am, ac) = {
            let (m, c) = rem.iter().next_back().unwrap();
            (m.clone(), c.clone())
        };
        let mut qexp = Vec::with_capacity(am.0.len());
        for (x, y) in am.0.iter().zip(&bm.0) {
            if x < y {
                return None;
            }
            qexp.push(x - y);
        }
        let qm = Mono(qexp);
        let qc = &ac / bc;
        // rem -= (qc * qm) * b
        for (m, c) in b {
            let pm = Mono(
                m.0.iter()
                    .zip(&qm.0)
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>(),
            );
            let delta = c * &qc;
            let entry = rem.entry(pm).or_insert_with(BigRational::zero);
            *entry -= delta;
            if entry.is_zero() {
                let key = {
                    let (k, _) = rem
                        .iter()
                        .find(|(_, v)| v.is_zero())
                        .expect("zero entry present");
                    k.clone()
                };
                rem.remove(&key);
            }
        }
        rem.retain(|_, c| !c.is_zero());
        quo.insert(qm, qc);
    }
    Some(quo)
}

// ---------------------------------------------------------------------------
// integer polynomials and multivariate gcd (primitive remainder sequences)

fn z_is_zero(p: &ZTerms) -> bool {
    p.is_empty()
}

fn z_mul(a: &ZTerms, b: &ZTerms) -> ZTerms {
    let mut out: ZTerms = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = Mono(
                ma.0.iter()
                    .zip(&mb.0)
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>(),
            );
            let c = ca * cb;
            let entry = out.entry(m).or_insert_with(BigInt::zero);
            *entry += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn z_sub(a: &ZTerms, b: &ZTerms) -> ZTerms {
    let mut out = a.clone();
    for (m, c) in b {
        let entry = out.entry(m.clone()).or_insert_with(BigInt::zero);
        *entry -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn z_div_exact(a: &ZTerms, b: &ZTerms) -> Option<ZTerms> {
    if z_is_zero(a) {
        return Some(BTreeMap::new());
    }
    let (bm, bc) = b.iter().next_back().unwrap();
    let mut rem = a.clone();
    let mut quo: ZTerms = BTreeMap::new();
    while !rem.is_empty() {
        let (am, ac) = {
            let (m, c) = rem.iter().next_back().unwrap();
            (m.clone(), c.clone())
        };
        let mut qexp = Vec::with_capacity(am.0.len());
        for (x, y) in am.0.iter().zip(&bm.0) {
            if x < y {
                return None;
            }
            qexp.push(x - y);
        }
        let (qc, r) = ac.div_rem(bc);
        if !r.is_zero() {
            return None;
        }
        let qm = Mono(qexp);
        for (m, c) in b {
            let pm = Mono(
                m.0.iter()
                    .zip(&qm.0)
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>(),
            );
            let delta = c * &qc;
            let entry = rem.entry(pm).or_insert_with(BigInt::zero);
            *entry -= delta;
        }
        rem.retain(|_, c| !c.is_zero());
        quo.insert(qm, qc);
    }
    Some(quo)
}

/// Scale a rational polynomial to a primitive integer polynomial with a
/// positive leading coefficient; the discarded factor is irrelevant for gcd.
fn to_primitive_z(p: &QTerms) -> ZTerms {
    if p.is_empty() {
        return BTreeMap::new();
    }
    let mut lcm = BigInt::one();
    for c in p.values() {
        lcm = lcm.lcm(c.denom());
    }
    let mut z: ZTerms = p
        .iter()
        .map(|(m, c)| (m.clone(), c.numer() * (&lcm / c.denom())))
        .collect();
    let mut content = BigInt::zero();
    for c in z.values() {
        content = content.gcd(c);
    }
    if !content.is_one() {
        for c in z.values_mut() {
            *c = &*c / &content;
        }
    }
    if z.iter().next_back().map(|(_, c)| c.is_negative()) == Some(true) {
        for c in z.values_mut() {
            *c = -&*c;
        }
    }
    z
}

/// Variables (generator columns) with a nonzero exponent somewhere in `p`.
fn z_vars(p: &ZTerms, width: usize) -> Vec<usize> {
    let mut used = vec![false; width];
    for m in p.keys() {
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                used[i] = true;
            }
        }
    }
    (0..width).filter(|&i| used[i]).collect()
}

fn z_const(p: &ZTerms) -> Option<BigInt> {
    if p.is_empty() {
        return Some(BigInt::zero());
    }
    if p.len() == 1 {
        let (m, c) = p.iter().next().unwrap();
        if m.total() == 0 {
            return Some(c.clone());
        }
    }
    None
}

fn z_const_poly(c: BigInt, width: usize) -> ZTerms {
    let mut t = BTreeMap::new();
    if !c.is_zero() {
        t.insert(Mono(vec![0; width]), c);
    }
    t
}

/// Univariate view in variable `v`: degree-in-`v` -> coefficient polynomial
/// (same monomial width, `v` column zeroed).
fn uni_view(p: &ZTerms, v: usize) -> BTreeMap<u32, ZTerms> {
    let mut out: BTreeMap<u32, ZTerms> = BTreeMap::new();
    for (m, c) in p {
        let d = m.0[v];
        let mut rest = m.0.clone();
        rest[v] = 0;
        out.entry(d)
            .or_default()
            .insert(Mono(rest), c.clone());
    }
    out
}

fn uni_flatten(u: &BTreeMap<u32, ZTerms>, v: usize) -> ZTerms {
    let mut out: ZTerms = BTreeMap::new();
    for (d, coeff) in u {
        for (m, c) in coeff {
            let mut exps = m.0.clone();
            exps[v] = *d;
            out.insert(Mono(exps), c.clone());
        }
    }
    out
}

/// Pseudo-remainder of `p` by `q`, both viewed as univariate in `v`.
fn z_prem(p: &ZTerms, q: &ZTerms, v: usize) -> ZTerms {
    let mut pu = uni_view(p, v);
    let qu = uni_view(q, v);
    let dq = *qu.keys().next_back().expect("nonzero divisor");
    let lq = qu[&dq].clone();
    loop {
        let dp = match pu.keys().next_back() {
            Some(&d) => d,
            None => return BTreeMap::new(),
        };
        if dp < dq {
            return uni_flatten(&pu, v);
        }
        let lp = pu[&dp].clone();
        // p := lq * p  -  lp * q * v^(dp - dq)
        let mut next: BTreeMap<u32, ZTerms> = BTreeMap::new();
        for (d, coeff) in &pu {
            let scaled = z_mul(coeff, &lq);
            if !scaled.is_empty() {
                next.insert(*d, scaled);
            }
        }
        for (d, coeff) in &qu {
            let shifted = d + dp - dq;
            let sub = z_mul(coeff, &lp);
            let entry = next.entry(shifted).or_default();
            let merged = z_sub(entry, &sub);
            if merged.is_empty() {
                next.remove(&shifted);
            } else {
                *entry = merged;
            }
        }
        pu = next;
    }
}

/// Content of `p` w.r.t. `v` (gcd of its univariate coefficients) and the
/// corresponding primitive part.
fn z_content_pp(p: &ZTerms, v: usize, width: usize) -> (ZTerms, ZTerms) {
    let u = uni_view(p, v);
    let mut content: ZTerms = BTreeMap::new();
    for coeff in u.values() {
        content = z_gcd(&content, coeff, width);
        if z_const(&content).map(|c| c.is_one()) == Some(true) {
            break;
        }
    }
    let pp = z_div_exact(p, &content).expect("content divides");
    (content, pp)
}

/// Multivariate gcd by primitive PRS; result has positive leading
/// coefficient and is unique up to that normalization.
fn z_gcd(a: &ZTerms, b: &ZTerms, width: usize) -> ZTerms {
    if z_is_zero(a) {
        return positive_lead(b.clone());
    }
    if z_is_zero(b) {
        return positive_lead(a.clone());
    }
    // Common monomial factor out front.
    let min_exp = |p: &ZTerms| -> Vec<u32> {
        let mut acc: Option<Vec<u32>> = None;
        for m in p.keys() {
            acc = Some(match acc {
                None => m.0.clone(),
                Some(prev) => prev.iter().zip(&m.0).map(|(x, y)| *x.min(y)).collect(),
            });
        }
        acc.unwrap()
    };
    let shift = |p: &ZTerms, by: &[u32]| -> ZTerms {
        p.iter()
            .map(|(m, c)| {
                (
                    Mono(m.0.iter().zip(by).map(|(e, s)| e - s).collect()),
                    c.clone(),
                )
            })
            .collect()
    };
    let ma = min_exp(a);
    let mb = min_exp(b);
    let common: Vec<u32> = ma.iter().zip(&mb).map(|(x, y)| *x.min(y)).collect();
    let a = shift(a, &common);
    let b = shift(b, &common);

    let core = z_gcd_core(&a, &b, width);
    let mono_start = z_const_poly(BigInt::one(), width);
    let mono = {
        let mut t = mono_start;
        if common.iter().any(|&e| e > 0) {
            let mut mt: ZTerms = BTreeMap::new();
            mt.insert(Mono(common), BigInt::one());
            t = z_mul(&t, &mt);
        }
        t
    };
    positive_lead(z_mul(&core, &mono))
}

fn z_gcd_core(a: &ZTerms, b: &ZTerms, width: usize) -> ZTerms {
    if let (Some(ca), Some(cb)) = (z_const(a), z_const(b)) {
        return z_const_poly(ca.gcd(&cb), width);
    }
    if let Some(ca) = z_const(a) {
        let mut content = BigInt::zero();
        for c in b.values() {
            content = content.gcd(c);
        }
        return z_const_poly(ca.gcd(&content), width);
    }
    if let Some(cb) = z_const(b) {
        let mut content = BigInt::zero();
        for c in a.values() {
            content = content.gcd(c);
        }
        return z_const_poly(cb.gcd(&content), width);
    }
    let vars_a = z_vars(a, width);
    let vars_b = z_vars(b, width);
    let v = *vars_a
        .iter()
        .chain(vars_b.iter())
        .max()
        .expect("nonconstant polynomials have variables");
    if !vars_a.contains(&v) || !vars_b.contains(&v) {
        // v appears on one side only: gcd cannot involve v.
        let (with_v, without_v) = if vars_a.contains(&v) { (a, b) } else { (b, a) };
        let (content, _) = z_content_pp(with_v, v, width);
        return z_gcd(&content, without_v, width);
    }
    let (ca, pa) = z_content_pp(a, v, width);
    let (cb, pb) = z_content_pp(b, v, width);
    let cg = z_gcd(&ca, &cb, width);

    let deg = |p: &ZTerms| p.keys().map(|m| m.0[v]).max().unwrap_or(0);
    let (mut p, mut q) = if deg(&pa) >= deg(&pb) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        let r = z_prem(&p, &q, v);
        if z_is_zero(&r) {
            break;
        }
        p = q;
        let (_, rpp) = z_content_pp(&r, v, width);
        q = rpp;
    }
    let gp = if deg(&q) == 0 {
        z_const_poly(BigInt::one(), width)
    } else {
        let (_, qpp) = z_content_pp(&q, v, width);
        qpp
    };
    z_mul(&cg, &gp)
}

fn positive_lead(mut p: ZTerms) -> ZTerms {
    if p.iter().next_back().map(|(_, c)| c.is_negative()) == Some(true) {
        for c in p.values_mut() {
            *c = -&*c;
        }
    }
    p
}

// ---------------------------------------------------------------------------
// Nf construction

impl Nf {
    fn constant(c: BigRational) -> Nf {
        Nf {
            gens: Vec::new(),
            num: q_const(c, 0),
            den: q_one(0),
            caveats: Vec::new(),
        }
    }

    fn gen(g: Gen) -> Nf {
        Nf {
            gens: vec![g],
            num: q_gen(0, 1),
            den: q_one(1),
            caveats: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        self.gens.len()
    }

    /// Drop generator columns that no longer occur in `num` or `den`.
    fn compress(&mut self) {
        let width = self.width();
        let mut used = vec![false; width];
        for m in self.num.keys().chain(self.den.keys()) {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..width).filter(|&i| used[i]).collect();
        let remap = |terms: &QTerms| -> QTerms {
            terms
                .iter()
                .map(|(m, c)| {
                    (
                        Mono(keep.iter().map(|&i| m.0[i]).collect()),
                        c.clone(),
                    )
                })
                .collect()
        };
        self.num = remap(&self.num);
        self.den = remap(&self.den);
        self.gens = keep.iter().map(|&i| self.gens[i].clone()).collect();
    }

    fn reduce(&mut self) {
        if self.den.is_empty() {
            // Degenerate quotient (division by exact zero); keep shape.
            self.compress();
            return;
        }
        if self.num.is_empty() {
            self.den = q_one(self.width());
            self.compress();
            return;
        }
        if let Some(c) = q_is_const(&self.den) {
            if !c.is_one() {
                self.num = q_scale(&self.num, &c.recip());
                self.den = q_one(self.width());
            }
            self.compress();
            return;
        }
        let zn = to_primitive_z(&self.num);
        let zd = to_primitive_z(&self.den);
        let g = z_gcd(&zn, &zd, self.width());
        if z_const(&g).is_none() || g.iter().next_back().map(|(m, _)| m.total() > 0) == Some(true)
        {
            let gq: QTerms = g
                .iter()
                .map(|(m, c)| (m.clone(), BigRational::from_integer(c.clone())))
                .collect();
            if let (Some(n2), Some(d2)) = (
                q_div_exact(&self.num, &gq),
                q_div_exact(&self.den, &gq),
            ) {
                self.num = n2;
                self.den = d2;
            }
        }
        // Monic denominator pins the scale.
        let lead = self
            .den
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .expect("nonzero denominator");
        if !lead.is_one() {
            let inv = lead.recip();
            self.num = q_scale(&self.num, &inv);
            self.den = q_scale(&self.den, &inv);
        }
        if q_is_const(&self.den).map(|c| c.is_one()) == Some(true) {
            self.den = q_one(self.width());
        }
        self.compress();
    }
}

/// Merge generator lists and remap both operands onto the union.
fn align(a: &Nf, b: &Nf) -> (Vec<Gen>, QTerms, QTerms, QTerms, QTerms) {
    let mut gens: Vec<Gen> = a.gens.iter().chain(b.gens.iter()).cloned().collect();
    gens.sort();
    gens.dedup();
    let map_of = |src: &[Gen]| -> Vec<usize> {
        src.iter()
            .map(|g| gens.binary_search(g).expect("gen present"))
            .collect()
    };
    let ma = map_of(&a.gens);
    let mb = map_of(&b.gens);
    let width = gens.len();
    let remap = |terms: &QTerms, map: &[usize]| -> QTerms {
        terms
            .iter()
            .map(|(m, c)| {
                let mut exps = vec![0u32; width];
                for (i, &e) in m.0.iter().enumerate() {
                    exps[map[i]] = e;
                }
                (Mono(exps), c.clone())
            })
            .collect()
    };
    (
        gens.clone(),
        remap(&a.num, &ma),
        remap(&a.den, &ma),
        remap(&b.num, &mb),
        remap(&b.den, &mb),
    )
}

fn nf_add(a: &Nf, b: &Nf, negate_b: bool) -> Nf {
    let (gens, an, ad, bn, bd) = align(a, b);
    let cross_b = q_mul(&bn, &ad);
    let cross_b = if negate_b { q_neg(&cross_b) } else { cross_b };
    let mut num = q_mul(&an, &bd);
    q_add_assign(&mut num, &cross_b);
    let den = q_mul(&ad, &bd);
    let mut out = Nf {
        gens,
        num,
        den,
        caveats: merged_caveats(a, b),
    };
    out.reduce();
    out
}

fn nf_mul(a: &Nf, b: &Nf) -> Nf {
    let (gens, an, ad, bn, bd) = align(a, b);
    let mut out = Nf {
        gens,
        num: q_mul(&an, &bn),
        den: q_mul(&ad, &bd),
        caveats: merged_caveats(a, b),
    };
    out.reduce();
    out
}

fn nf_div(a: &Nf, b: &Nf) -> Nf {
    let (gens, an, ad, bn, bd) = align(a, b);
    let mut caveats = merged_caveats(a, b);
    if q_is_const(&bn).is_none() {
        caveats.push(render_quotient(&gens, &bn, &q_one(gens.len())));
    }
    let mut out = Nf {
        gens,
        num: q_mul(&an, &bd),
        den: q_mul(&ad, &bn),
        caveats,
    };
    out.reduce();
    out
}

fn nf_pow(a: &Nf, k: i32) -> Nf {
    let width = a.width();
    if k == 0 {
        return Nf {
            gens: a.gens.clone(),
            num: q_one(width),
            den: q_one(width),
            caveats: a.caveats.clone(),
        };
    }
    let e = k.unsigned_abs();
    let mut caveats = a.caveats.clone();
    let (num, den) = if k > 0 {
        (q_pow(&a.num, e, width), q_pow(&a.den, e, width))
    } else {
        if q_is_const(&a.num).is_none() {
            caveats.push(render_quotient(&a.gens, &a.num, &q_one(width)));
        }
        (q_pow(&a.den, e, width), q_pow(&a.num, e, width))
    };
    let mut out = Nf {
        gens: a.gens.clone(),
        num,
        den,
        caveats,
    };
    out.reduce();
    out
}

fn merged_caveats(a: &Nf, b: &Nf) -> Vec<ScalarExpr> {
    let mut c = a.caveats.clone();
    c.extend(b.caveats.iter().cloned());
    c
}

fn to_nf(e: &ScalarExpr) -> Nf {
    match e {
        ScalarExpr::Rat(q) => Nf::constant(q.clone()),
        ScalarExpr::Coord(i) => Nf::gen(Gen::Coord(*i)),
        ScalarExpr::Add(a, b) => nf_add(&to_nf(a), &to_nf(b), false),
        ScalarExpr::Sub(a, b) => nf_add(&to_nf(a), &to_nf(b), true),
        ScalarExpr::Mul(a, b) => nf_mul(&to_nf(a), &to_nf(b)),
        ScalarExpr::Div(a, b) => nf_div(&to_nf(a), &to_nf(b)),
        ScalarExpr::Pow(b, k) => nf_pow(&to_nf(b), *k),
        ScalarExpr::Sin(u) => kernel_nf(u, Gen::Sin, |_| None, true),
        ScalarExpr::Cos(u) => kernel_nf(u, Gen::Cos, |z| z.then(|| BigRational::one()), false),
        ScalarExpr::Exp(u) => kernel_nf(u, Gen::Exp, |z| z.then(|| BigRational::one()), false),
    }
}

/// Build the generator for a transcendental call with canonical argument;
/// `fold` maps "argument is exactly zero" to a constant value if one exists.
fn kernel_nf(
    arg: &ScalarExpr,
    make: fn(ScalarExpr) -> Gen,
    fold: fn(bool) -> Option<BigRational>,
    zero_gives_zero: bool,
) -> Nf {
    let inner = to_nf(arg);
    let zero = inner.num.is_empty() && !inner.den.is_empty();
    if zero {
        if zero_gives_zero {
            let mut nf = Nf::constant(BigRational::zero());
            nf.caveats = inner.caveats;
            return nf;
        }
        if let Some(c) = fold(true) {
            let mut nf = Nf::constant(c);
            nf.caveats = inner.caveats;
            return nf;
        }
    }
    let canonical = render(&inner);
    let mut nf = Nf::gen(make(canonical));
    nf.caveats = inner.caveats;
    nf
}

// ---------------------------------------------------------------------------
// rendering back to a canonical tree

fn gen_expr(g: &Gen) -> ScalarExpr {
    match g {
        Gen::Coord(i) => ScalarExpr::Coord(*i),
        Gen::Sin(a) => ScalarExpr::Sin(Arc::new(a.clone())),
        Gen::Cos(a) => ScalarExpr::Cos(Arc::new(a.clone())),
        Gen::Exp(a) => ScalarExpr::Exp(Arc::new(a.clone())),
    }
}

fn mono_expr(gens: &[Gen], m: &Mono) -> Option<ScalarExpr> {
    let mut acc: Option<ScalarExpr> = None;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let base = gen_expr(&gens[i]);
        let f = if e == 1 {
            base
        } else {
            ScalarExpr::Pow(Arc::new(base), e as i32)
        };
        acc = Some(match acc {
            None => f,
            Some(prev) => ScalarExpr::Mul(Arc::new(prev), Arc::new(f)),
        });
    }
    acc
}

fn poly_expr(gens: &[Gen], terms: &QTerms) -> ScalarExpr {
    if terms.is_empty() {
        return ScalarExpr::zero();
    }
    let mut acc: Option<ScalarExpr> = None;
    for (m, c) in terms.iter().rev() {
        let term = match mono_expr(gens, m) {
            None => ScalarExpr::Rat(c.clone()),
            Some(me) => {
                if c.is_one() {
                    me
                } else {
                    ScalarExpr::Mul(Arc::new(ScalarExpr::Rat(c.clone())), Arc::new(me))
                }
            }
        };
        acc = Some(match acc {
            None => term,
            Some(prev) => ScalarExpr::Add(Arc::new(prev), Arc::new(term)),
        });
    }
    acc.unwrap()
}

fn render_quotient(gens: &[Gen], num: &QTerms, den: &QTerms) -> ScalarExpr {
    let n = poly_expr(gens, num);
    if q_is_const(den).map(|c| c.is_one()) == Some(true) {
        n
    } else {
        ScalarExpr::Div(Arc::new(n), Arc::new(poly_expr(gens, den)))
    }
}

fn render(nf: &Nf) -> ScalarExpr {
    if nf.den.is_empty() {
        // Division by exact zero: keep an honest undefined quotient.
        return ScalarExpr::Div(
            Arc::new(poly_expr(&nf.gens, &nf.num)),
            Arc::new(ScalarExpr::zero()),
        );
    }
    render_quotient(&nf.gens, &nf.num, &nf.den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ScalarExpr {
        ScalarExpr::coord(0)
    }
    fn y() -> ScalarExpr {
        ScalarExpr::coord(1)
    }

    #[test]
    fn binomial_identity_collapses() {
        // (x+1)^2 - x^2 - 2x - 1 == 0
        let e = (x() + ScalarExpr::one()).pow(2)
            - x().pow(2)
            - ScalarExpr::int(2) * x()
            - ScalarExpr::one();
        let n = e.normalized();
        assert!(n.is_exactly_zero());
        assert_eq!(n.expr, ScalarExpr::zero());
    }

    #[test]
    fn cancellation_records_caveat() {
        let e = x() / x();
        let n = e.normalized();
        assert_eq!(n.expr, ScalarExpr::one());
        assert_eq!(n.caveats, vec![x()]);
    }

    #[test]
    fn sin_plus_zero_normalizes_argument() {
        let e = ScalarExpr::sin(x() + ScalarExpr::zero());
        assert_eq!(e.normalize(), ScalarExpr::sin(x()));
    }

    #[test]
    fn kernel_constants_fold() {
        assert_eq!(
            ScalarExpr::sin(x() - x()).normalize(),
            ScalarExpr::zero()
        );
        assert_eq!(ScalarExpr::cos(ScalarExpr::zero()).normalize(), ScalarExpr::one());
        assert_eq!(ScalarExpr::exp(ScalarExpr::zero()).normalize(), ScalarExpr::one());
    }

    #[test]
    fn pythagoras_does_not_collapse() {
        let e = ScalarExpr::sin(x()).pow(2) + ScalarExpr::cos(x()).pow(2) - ScalarExpr::one();
        assert!(!e.normalized().is_exactly_zero());
    }

    #[test]
    fn rational_functions_reduce() {
        // (x^2 - y^2) / (x - y) -> x + y
        let e = (x().pow(2) - y().pow(2)) / (x() - y());
        assert_eq!(e.normalize(), (x() + y()).normalize());
    }

    #[test]
    fn normalize_is_idempotent_on_quotients() {
        let e = (x().pow(3) + y()) / (x() * y() - ScalarExpr::one())
            + ScalarExpr::sin(x() * y());
        let once = e.normalize();
        assert_eq!(once.normalize(), once);
    }

    #[test]
    fn denominator_is_monic() {
        // 1 / (2x - 2) should scale to (1/2) / (x - 1)
        let e = ScalarExpr::one() / (ScalarExpr::int(2) * x() - ScalarExpr::int(2));
        let n = e.normalize();
        let again = (ScalarExpr::rat(1, 2) / (x() - ScalarExpr::one())).normalize();
        assert_eq!(n, again);
    }

    #[test]
    fn gcd_multivariate() {
        // ((x+y)^2 * (x - y)) / (x + y) -> (x+y)(x-y) = x^2 - y^2
        let e = ((x() + y()).pow(2) * (x() - y())) / (x() + y());
        let want = (x().pow(2) - y().pow(2)).normalize();
        assert_eq!(e.normalize(), want);
    }

    #[test]
    fn division_by_exact_zero_stays_undefined() {
        let e = ScalarExpr::one() / (x() - x());
        let n = e.normalize();
        assert!(matches!(n, ScalarExpr::Div(_, _)));
        assert!(n.eval(&[0.5]).is_err());
    }

    #[test]
    fn distinct_kernels_stay_distinct() {
        // exp(x) * exp(-x) is not rewritten to 1.
        let e = ScalarExpr::exp(x()) * ScalarExpr::exp(-x()) - ScalarExpr::one();
        assert!(!e.normalized().is_exactly_zero());
    }
}
