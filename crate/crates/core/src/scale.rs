//! Exact arithmetic in the ring of finite rational-linear combinations of
//! monomials `prod_s s^{p_s} (log s)^{q_s}` over a declared set of scale
//! symbols, together with the renormalization-scheme projector [`sing`]
//! relative to a distinguished regulator symbol.
//!
//! A term is *singular* in the regulator when its regulator power is negative,
//! or zero with a positive log degree. The scheme splits the ring into the
//! span of singular monomials and the span of monomials with a regulator
//! limit; `sing` projects onto the first summand.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Declares the scale symbols in play and singles out the regulator.
#[derive(Debug, PartialEq, Eq)]
pub struct ScaleContext {
    symbols: Vec<String>,
    regulator: usize,
}

impl ScaleContext {
    pub fn new(symbols: &[&str], regulator: usize) -> Result<Arc<Self>> {
        let symbols: Vec<String> = symbols.iter().map(|s| s.to_string()).collect();
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Config(format!("duplicate scale symbol `{s}`")));
            }
        }
        if regulator >= symbols.len() {
            return Err(Error::Config("regulator index out of range".into()));
        }
        Ok(Arc::new(ScaleContext { symbols, regulator }))
    }

    pub fn regulator(&self) -> usize {
        self.regulator
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }
}

/// A single monomial `prod_s s^{p_s} (log s)^{q_s}`; entries with
/// `(p, q) = (0, 0)` are never stored, so the unit monomial is empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScaleMonomial {
    factors: Vec<(usize, Rat, u32)>,
}

impl ScaleMonomial {
    pub fn unit() -> Self {
        ScaleMonomial { factors: Vec::new() }
    }

    pub fn from_factors(mut factors: Vec<(usize, Rat, u32)>) -> Self {
        factors.retain(|(_, p, q)| !p.is_zero() || *q != 0);
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        ScaleMonomial { factors }
    }

    pub fn factors(&self) -> &[(usize, Rat, u32)] {
        &self.factors
    }

    fn exponents(&self, symbol: usize) -> (Rat, u32) {
        for (s, p, q) in &self.factors {
            if *s == symbol {
                return (p.clone(), *q);
            }
        }
        (Rat::zero(), 0)
    }

    fn mul(&self, other: &ScaleMonomial) -> ScaleMonomial {
        let mut map: BTreeMap<usize, (Rat, u32)> = BTreeMap::new();
        for (s, p, q) in self.factors.iter().chain(&other.factors) {
            let e = map.entry(*s).or_insert_with(|| (Rat::zero(), 0));
            e.0 += p;
            e.1 += q;
        }
        ScaleMonomial::from_factors(map.into_iter().map(|(s, (p, q))| (s, p, q)).collect())
    }

    /// Singularity test against the regulator: a negative power, or a pure
    /// logarithm at power zero.
    fn is_singular(&self, regulator: usize) -> bool {
        let (p, q) = self.exponents(regulator);
        p.is_negative() || (p.is_zero() && q >= 1)
    }

    fn without_symbol(&self, symbol: usize) -> ScaleMonomial {
        ScaleMonomial {
            factors: self.factors.iter().filter(|(s, _, _)| *s != symbol).cloned().collect(),
        }
    }
}

/// Finite rational-linear combination of [`ScaleMonomial`]s, kept canonical:
/// no zero coefficients, terms ordered by monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleFunction {
    ctx: Arc<ScaleContext>,
    terms: BTreeMap<ScaleMonomial, Rat>,
}

impl ScaleFunction {
    pub fn zero(ctx: &Arc<ScaleContext>) -> Self {
        ScaleFunction { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Arc<ScaleContext>, c: Rat) -> Self {
        let mut f = Self::zero(ctx);
        if !c.is_zero() {
            f.terms.insert(ScaleMonomial::unit(), c);
        }
        f
    }

    pub fn monomial(ctx: &Arc<ScaleContext>, c: Rat, m: ScaleMonomial) -> Self {
        let mut f = Self::zero(ctx);
        if !c.is_zero() {
            f.terms.insert(m, c);
        }
        f
    }

    /// `c * symbol^power`
    pub fn symbol_power(ctx: &Arc<ScaleContext>, symbol: usize, power: Rat) -> Self {
        Self::monomial(ctx, Rat::one(), ScaleMonomial::from_factors(vec![(symbol, power, 0)]))
    }

    /// `log(symbol)`
    pub fn log_symbol(ctx: &Arc<ScaleContext>, symbol: usize) -> Self {
        Self::monomial(ctx, Rat::one(), ScaleMonomial::from_factors(vec![(symbol, Rat::zero(), 1)]))
    }

    pub fn context(&self) -> &Arc<ScaleContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ScaleMonomial, &Rat)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.factors.is_empty() {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_term(&mut self, m: ScaleMonomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_ctx(&self, other: &ScaleFunction) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &ScaleFunction) -> Result<ScaleFunction> {
        self.same_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &ScaleFunction) -> Result<ScaleFunction> {
        self.same_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &ScaleFunction) -> Result<ScaleFunction> {
        self.same_ctx(other)?;
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> ScaleFunction {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let mut out = Self::zero(&self.ctx);
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    /// Projection onto the purely singular part of the monomial-basis scheme.
    pub fn sing(&self) -> ScaleFunction {
        let reg = self.ctx.regulator;
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.is_singular(reg) {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// The regulator -> 0 limit; exists exactly when `sing` vanishes.
    pub fn limit_regulator_zero(&self) -> Result<ScaleFunction> {
        let s = self.sing();
        if !s.is_zero() {
            return Err(Error::DivergentLimit(Box::new(s)));
        }
        let reg = self.ctx.regulator;
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let (p, _) = m.exponents(reg);
            // eps^p log^q eps -> 0 for p > 0; p < 0 or pure logs were singular.
            if p.is_zero() {
                out.insert_term(m.without_symbol(reg), c.clone());
            }
        }
        Ok(out)
    }

    pub fn contains_symbol(&self, symbol: usize) -> bool {
        self.terms.keys().any(|m| m.factors.iter().any(|(s, _, _)| *s == symbol))
    }

    /// Floating-point value at a positive assignment (one value per context
    /// symbol, in declaration order).
    pub fn eval_numeric(&self, assignment: &[f64]) -> Result<f64> {
        if assignment.len() != self.ctx.symbols.len() {
            return Err(Error::Config("assignment length does not match context".into()));
        }
        for (i, v) in assignment.iter().enumerate() {
            if *v <= 0.0 {
                return Err(Error::NonPositiveAssignment(self.ctx.symbols[i].clone()));
            }
        }
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut val = c.to_f64().expect("rational out of f64 range");
            for (s, p, q) in &m.factors {
                let x = assignment[*s];
                val *= x.powf(p.to_f64().expect("power out of f64 range"));
                val *= x.ln().powi(*q as i32);
            }
            total += val;
        }
        Ok(total)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| TermRecord {
                coeff: c.to_string(),
                factors: m
                    .factors
                    .iter()
                    .map(|(s, p, q)| FactorRecord {
                        symbol: self.ctx.symbols[*s].clone(),
                        power: p.to_string(),
                        log_degree: *q,
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn from_records(ctx: &Arc<ScaleContext>, records: &[TermRecord]) -> Result<ScaleFunction> {
        let mut out = Self::zero(ctx);
        for r in records {
            let c = Rat::from_str(&r.coeff)
                .map_err(|e| Error::Config(format!("bad coefficient `{}`: {e}", r.coeff)))?;
            let mut factors = Vec::new();
            for f in &r.factors {
                let s = ctx.index_of(&f.symbol)?;
                let p = Rat::from_str(&f.power)
                    .map_err(|e| Error::Config(format!("bad power `{}`: {e}", f.power)))?;
                factors.push((s, p, f.log_degree));
            }
            out.insert_term(ScaleMonomial::from_factors(factors), c);
        }
        Ok(out)
    }
}

/// Serialized form of one term, exact coefficients as strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: String,
    pub factors: Vec<FactorRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorRecord {
    pub symbol: String,
    pub power: String,
    pub log_degree: u32,
}

impl fmt::Display for ScaleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (s, p, q) in &m.factors {
                let name = &self.ctx.symbols[*s];
                if !p.is_zero() {
                    write!(f, "*{name}^{p}")?;
                }
                if *q > 0 {
                    write!(f, "*log({name})^{q}")?;
                }
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &ScaleFunction {
            type Output = ScaleFunction;
            fn $method(self, rhs: &ScaleFunction) -> ScaleFunction {
                self.$checked(rhs).expect("scale context mismatch")
            }
        }
        impl $trait for ScaleFunction {
            type Output = ScaleFunction;
            fn $method(self, rhs: ScaleFunction) -> ScaleFunction {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &ScaleFunction {
    type Output = ScaleFunction;
    fn neg(self) -> ScaleFunction {
        self.scale(&-Rat::one())
    }
}

/// Exact `int_{lo}^{hi} c t^{-a} dt` as a scale function; swapping the
/// endpoints negates the result.
pub fn integrate_power(
    ctx: &Arc<ScaleContext>,
    c: &Rat,
    a: &Rat,
    lo: usize,
    hi: usize,
) -> ScaleFunction {
    if a.is_one() {
        let log_hi = ScaleFunction::log_symbol(ctx, hi);
        let log_lo = ScaleFunction::log_symbol(ctx, lo);
        (&log_hi - &log_lo).scale(c)
    } else {
        let p = Rat::one() - a;
        let hi_part = ScaleFunction::symbol_power(ctx, hi, p.clone());
        let lo_part = ScaleFunction::symbol_power(ctx, lo, p.clone());
        (&hi_part - &lo_part).scale(&(c / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_el() -> Arc<ScaleContext> {
        ScaleContext::new(&["eps", "L"], 0).unwrap()
    }

    fn eps_pow(ctx: &Arc<ScaleContext>, n: i64, d: i64) -> ScaleFunction {
        ScaleFunction::symbol_power(ctx, 0, rat(n, d))
    }

    #[test]
    fn log_cancellation() {
        let ctx = ctx_el();
        let log_l = ScaleFunction::log_symbol(&ctx, 1);
        let log_e = ScaleFunction::log_symbol(&ctx, 0);
        let sum = &(&log_l - &log_e) + &log_e;
        assert_eq!(sum, log_l);
    }

    #[test]
    fn exponent_addition() {
        let ctx = ctx_el();
        let inv = eps_pow(&ctx, -1, 1);
        assert_eq!(&inv * &inv, eps_pow(&ctx, -2, 1));
    }

    #[test]
    fn square_of_log_difference() {
        let ctx = ctx_el();
        let d = &ScaleFunction::log_symbol(&ctx, 1) - &ScaleFunction::log_symbol(&ctx, 0);
        let sq = &d * &d;
        // (logL)^2 - 2 logE logL + (logE)^2
        assert_eq!(sq.terms.len(), 3);
        // Cross-check at eps = 1/10, L = 2.
        let expect = (2f64.ln() - 0.1f64.ln()).powi(2);
        assert!((sq.eval_numeric(&[0.1, 2.0]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn sing_classifies_monomials() {
        let ctx = ctx_el();
        let pole = &eps_pow(&ctx, -1, 1) * &ScaleFunction::symbol_power(&ctx, 1, rat_int(1));
        let vanishing = &eps_pow(&ctx, 1, 1) * &ScaleFunction::log_symbol(&ctx, 0);
        let f = &(&pole + &ScaleFunction::constant(&ctx, rat_int(3))) + &vanishing;
        assert_eq!(f.sing(), pole);
    }

    #[test]
    fn sing_of_zero() {
        let ctx = ctx_el();
        assert!(ScaleFunction::zero(&ctx).sing().is_zero());
    }

    #[test]
    fn limit_drops_vanishing_terms() {
        let ctx = ctx_el();
        let vanish = &(&eps_pow(&ctx, 1, 1) * &ScaleFunction::log_symbol(&ctx, 0))
            * &ScaleFunction::symbol_power(&ctx, 1, rat_int(1));
        let f = &ScaleFunction::constant(&ctx, rat_int(3)) + &vanish;
        assert_eq!(f.limit_regulator_zero().unwrap(), ScaleFunction::constant(&ctx, rat_int(3)));
    }

    #[test]
    fn limit_of_pole_diverges() {
        let ctx = ctx_el();
        assert!(matches!(
            eps_pow(&ctx, -1, 1).limit_regulator_zero(),
            Err(Error::DivergentLimit(_))
        ));
    }

    #[test]
    fn eval_numeric_basics() {
        let ctx = ctx_el();
        let log_l = ScaleFunction::log_symbol(&ctx, 1);
        assert_eq!(log_l.eval_numeric(&[0.5, 1.0]).unwrap(), 0.0);
        assert_eq!(eps_pow(&ctx, -1, 1).eval_numeric(&[0.25, 1.0]).unwrap(), 4.0);
        assert!(matches!(
            log_l.eval_numeric(&[0.5, -1.0]),
            Err(Error::NonPositiveAssignment(_))
        ));
    }

    #[test]
    fn integrate_power_examples() {
        let ctx = ctx_el();
        let one = rat_int(1);
        let got = integrate_power(&ctx, &one, &one, 0, 1);
        let expect = &ScaleFunction::log_symbol(&ctx, 1) - &ScaleFunction::log_symbol(&ctx, 0);
        assert_eq!(got, expect);

        let got = integrate_power(&ctx, &one, &rat_int(2), 0, 1);
        let expect = &eps_pow(&ctx, -1, 1) - &ScaleFunction::symbol_power(&ctx, 1, rat_int(-1));
        assert_eq!(got, expect);
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = ScaleFunction::constant(&ctx_el(), rat_int(1));
        let b = ScaleFunction::constant(&ScaleContext::new(&["eps", "L", "L0"], 0).unwrap(), rat_int(1));
        assert!(matches!(a.checked_add(&b), Err(Error::ContextMismatch)));
    }

    #[test]
    fn record_round_trip() {
        let ctx = ctx_el();
        let f = &(&eps_pow(&ctx, -3, 2) * &ScaleFunction::log_symbol(&ctx, 1))
            + &ScaleFunction::constant(&ctx, rat(7, 3));
        let back = ScaleFunction::from_records(&ctx, &f.to_records()).unwrap();
        assert_eq!(back, f);
    }
}
