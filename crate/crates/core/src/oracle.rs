//! Non-diagrammatic evaluation of the flow: W(I,P) = hbar ln[exp(hbar D_P)
//! exp(I/hbar)] computed by truncated formal power series in the field
//! variables and hbar. This pins every combinatorial convention of the graph
//! expansion (orbit sums, symmetry factors, the 1/2 in D_P) independently.
//!
//! Truncation uses the weight grading w = 2*(hbar order) + (field degree),
//! which hbar D_P preserves; the constant parts of the interaction are
//! factored out of the exponential and added back at the end.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::One;

use crate::error::{Error, Result};
use crate::model::{GradedFunctional, Propagator, SymFunctional};
use crate::scale::{rat, Rat, ScaleContext, ScaleFunction};

/// Formal series: hbar power (possibly negative) and field exponent vector
/// to scale-function coefficient, truncated by weight and field degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    ctx: Arc<ScaleContext>,
    dim: usize,
    weight_cap: i64,
    degree_cap: u32,
    terms: BTreeMap<(i64, Vec<u32>), ScaleFunction>,
}

fn weight(p: i64, alpha: &[u32]) -> i64 {
    2 * p + alpha.iter().sum::<u32>() as i64
}

impl PowerSeries {
    pub fn zero(ctx: &Arc<ScaleContext>, dim: usize, weight_cap: i64, degree_cap: u32) -> Self {
        PowerSeries {
            ctx: Arc::clone(ctx),
            dim,
            weight_cap,
            degree_cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<ScaleContext>, dim: usize, weight_cap: i64, degree_cap: u32) -> Self {
        let mut s = Self::zero(ctx, dim, weight_cap, degree_cap);
        s.add_term(0, vec![0; dim], ScaleFunction::constant(ctx, Rat::one()))
            .expect("constant term");
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: i64, alpha: &[u32]) -> Option<&ScaleFunction> {
        self.terms.get(&(p, alpha.to_vec()))
    }

    pub fn add_term(&mut self, p: i64, alpha: Vec<u32>, value: ScaleFunction) -> Result<()> {
        if alpha.len() != self.dim {
            return Err(Error::GradedMismatch);
        }
        let deg: u32 = alpha.iter().sum();
        if weight(p, &alpha) > self.weight_cap || deg > self.degree_cap || value.is_zero() {
            return Ok(());
        }
        let key = (p, alpha);
        let next = match self.terms.get(&key) {
            Some(v) => v.checked_add(&value)?,
            None => value,
        };
        if next.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, next);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &PowerSeries) -> Result<PowerSeries> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for ((p, alpha), v) in &other.terms {
            out.add_term(*p, alpha.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &PowerSeries) -> Result<PowerSeries> {
        self.check_shape(other)?;
        let mut out = Self::zero(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        for ((p1, a1), v1) in &self.terms {
            let w1 = weight(*p1, a1);
            let d1: u32 = a1.iter().sum();
            for ((p2, a2), v2) in &other.terms {
                // Cheap cap pre-check; skips the rational arithmetic for
                // products that add_term would drop anyway.
                if w1 + weight(*p2, a2) > self.weight_cap
                    || d1 + a2.iter().sum::<u32>() > self.degree_cap
                {
                    continue;
                }
                let alpha: Vec<u32> = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
                out.add_term(p1 + p2, alpha, v1.checked_mul(v2)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> PowerSeries {
        let mut out = Self::zero(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        for ((p, alpha), v) in &self.terms {
            let w = v.scale(c);
            if !w.is_zero() {
                out.terms.insert((*p, alpha.clone()), w);
            }
        }
        out
    }

    /// Multiplies by hbar^k.
    pub fn shift_hbar(&self, k: i64) -> Result<PowerSeries> {
        let mut out = Self::zero(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        for ((p, alpha), v) in &self.terms {
            out.add_term(p + k, alpha.clone(), v.clone())?;
        }
        Ok(out)
    }

    fn check_shape(&self, other: &PowerSeries) -> Result<()> {
        if self.dim != other.dim
            || self.weight_cap != other.weight_cap
            || self.degree_cap != other.degree_cap
        {
            return Err(Error::GradedMismatch);
        }
        Ok(())
    }

    fn min_weight(&self) -> Option<i64> {
        self.terms.keys().map(|(p, a)| weight(*p, a)).min()
    }

    /// exp of a series whose terms all have weight at least one.
    pub fn exp(&self) -> Result<PowerSeries> {
        assert!(self.min_weight().map_or(true, |w| w >= 1), "exp needs weight >= 1");
        let mut acc = Self::one(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        let mut power = acc.clone();
        let mut k: i64 = 0;
        while !power.is_zero() && k <= self.weight_cap {
            k += 1;
            power = power.checked_mul(self)?.scale(&rat(1, k));
            acc = acc.checked_add(&power)?;
        }
        Ok(acc)
    }

    /// ln of a series with constant term one; the rest must have weight at
    /// least one.
    pub fn ln(&self) -> Result<PowerSeries> {
        let one = Self::one(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        let x = self.checked_add(&one.scale(&-Rat::one()))?;
        assert!(x.min_weight().map_or(true, |w| w >= 1), "ln needs unit constant term");
        let mut acc = Self::zero(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        let mut power = one;
        let mut k: i64 = 0;
        loop {
            k += 1;
            power = power.checked_mul(&x)?;
            if power.is_zero() || k > self.weight_cap + 1 {
                break;
            }
            let sign = if k % 2 == 0 { -Rat::one() } else { Rat::one() };
            acc = acc.checked_add(&power.scale(&(sign / Rat::from_integer(k.into()))))?;
        }
        Ok(acc)
    }

    /// One application of hbar D_P = (hbar/2) sum_ab P_ab d_a d_b; preserves
    /// the weight grading.
    pub fn heat_step(&self, p: &Propagator) -> Result<PowerSeries> {
        let mut out = Self::zero(&self.ctx, self.dim, self.weight_cap, self.degree_cap);
        for ((hp, alpha), v) in &self.terms {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    let pab = p.entry(a, b);
                    if pab.is_zero() {
                        continue;
                    }
                    let mut factor = alpha[a] as i64;
                    let mut next = alpha.clone();
                    if next[a] == 0 {
                        continue;
                    }
                    next[a] -= 1;
                    factor *= next[b] as i64;
                    if next[b] == 0 {
                        continue;
                    }
                    next[b] -= 1;
                    let coeff = rat(factor, 2);
                    out.add_term(hp + 1, next, v.checked_mul(pab)?.scale(&coeff))?;
                }
            }
        }
        Ok(out)
    }

    /// exp(hbar D_P) applied to the series; terminates because every step
    /// lowers the field degree by two.
    pub fn heat_flow(&self, p: &Propagator) -> Result<PowerSeries> {
        let mut acc = self.clone();
        let mut term = self.clone();
        let mut k: i64 = 0;
        while !term.is_zero() {
            k += 1;
            term = term.heat_step(p)?.scale(&rat(1, k));
            if term.is_zero() {
                break;
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }
}

/// Field-degree cap derived from the edge bound: contributions to a
/// component (i,j) pass through intermediate degrees at most 10i + 3j.
pub fn default_degree_cap(indices: &BTreeSet<(u32, u32)>) -> u32 {
    let gmax = indices.iter().map(|&(i, _)| i).max().unwrap_or(0);
    let dmax = indices.iter().map(|&(_, j)| j).max().unwrap_or(0);
    10 * gmax + 3 * dmax
}

/// W(I,P) over the given index set, computed without graphs. `degree_cap`
/// overrides the derived intermediate field-degree bound (used to
/// demonstrate truncation stability).
pub fn w_oracle(
    i: &GradedFunctional,
    p: &Propagator,
    indices: &BTreeSet<(u32, u32)>,
    degree_cap: Option<u32>,
) -> Result<GradedFunctional> {
    let ctx = i.context();
    let dim = i.dim();
    let mut out = GradedFunctional::new(Arc::clone(ctx), dim, indices.clone());
    let Some(weight_cap) =
        indices.iter().map(|&(gi, gj)| 2 * gi as i64 + gj as i64 - 2).max()
    else {
        return Ok(out);
    };
    let dcap = degree_cap.unwrap_or_else(|| default_degree_cap(indices));

    // I'/hbar: the non-constant components, one hbar order down.
    let mut seed = PowerSeries::zero(ctx, dim, weight_cap, dcap);
    for (&(gi, gj), part) in i.components() {
        if gj == 0 {
            continue;
        }
        for (alpha, c) in part.terms() {
            seed.add_term(gi as i64 - 1, alpha.clone(), c.clone())?;
        }
    }
    let flowed = seed.exp()?.heat_flow(p)?;
    // ln Z; the overall hbar factor of W is absorbed by reading the (i,j)
    // component at hbar^(i-1), since shifting the series itself would push
    // terms past the weight cap.
    let w_series = flowed.ln()?;
    for ((hp, _alpha), v) in &w_series.terms {
        assert!(*hp >= -1, "flow produced a disconnected hbar order");
        debug_assert!(!v.is_zero());
    }

    for &(gi, gj) in indices {
        let mut part = if gj == 0 { i.component(gi, 0) } else { SymFunctional::zero(dim, gj) };
        for ((hp, alpha), v) in &w_series.terms {
            if *hp == gi as i64 - 1 && alpha.iter().sum::<u32>() == gj {
                part.add_term(alpha, v)?;
            }
        }
        out.set_component(gi, gj, part)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::w_graph;
    use crate::graph::GraphCatalog;
    use crate::model::{propagator, rect_indices, FieldSpace, KernelMode, KernelModel};
    use crate::scale::rat_int;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx() -> Arc<ScaleContext> {
        ScaleContext::new(&["eps", "L"], 0).unwrap()
    }

    fn cubic_quartic(ctx: &Arc<ScaleContext>, g3: Rat, g4: Rat) -> GradedFunctional {
        let mut i = GradedFunctional::new(Arc::clone(ctx), 1, rect_indices(2, 4));
        if g3 != rat_int(0) {
            let mut p3 = SymFunctional::zero(1, 3);
            p3.insert(vec![3], ScaleFunction::constant(ctx, g3)).unwrap();
            i.set_component(0, 3, p3).unwrap();
        }
        let mut p4 = SymFunctional::zero(1, 4);
        p4.insert(vec![4], ScaleFunction::constant(ctx, g4)).unwrap();
        i.set_component(0, 4, p4).unwrap();
        i
    }

    fn log_model() -> KernelModel {
        KernelModel {
            space: FieldSpace::new(1).unwrap(),
            modes: vec![KernelMode {
                vector: vec![rat_int(1)],
                profile: vec![(rat_int(1), rat_int(1))],
            }],
        }
    }

    #[test]
    fn zero_propagator_returns_interaction() {
        let ctx = ctx();
        let i = cubic_quartic(&ctx, rat(1, 6), rat(1, 24));
        let w = w_oracle(&i, &Propagator::zero(&ctx, 1), &rect_indices(2, 4), None).unwrap();
        assert_eq!(w, i.truncate(rect_indices(2, 4)));
    }

    #[test]
    fn tree_exchange_coefficient() {
        // Two cubic vertices joined by one edge: (0,4) coefficient is
        // (6 g3)^2 p / (aut = 8) on top of the bare quartic coupling.
        let ctx = ctx();
        let g3 = rat(2, 5);
        let g4 = rat(1, 24);
        let i = cubic_quartic(&ctx, g3.clone(), g4.clone());
        let p = propagator(&log_model(), &ctx, 0, 1).unwrap();
        let w = w_oracle(&i, &p, &rect_indices(2, 4), None).unwrap();
        let coeff = w.component(0, 4);
        let expected = ScaleFunction::constant(&ctx, g4)
            .checked_add(&p.entry(0, 0).scale(&(&g3 * &g3 * rat(36, 8))))
            .unwrap();
        assert_eq!(coeff.coeff(&[4]), Some(&expected));
    }

    #[test]
    fn oracle_matches_graph_expansion_on_standard_model() {
        let ctx = ctx();
        let i = cubic_quartic(&ctx, rat(1, 6), rat(1, 24));
        let p = propagator(&log_model(), &ctx, 0, 1).unwrap();
        let catalog = GraphCatalog::new();
        let indices = rect_indices(2, 4);
        let by_graphs = w_graph(&i, &p, &catalog, &indices).unwrap();
        let by_series = w_oracle(&i, &p, &indices, None).unwrap();
        assert_eq!(by_graphs, by_series);
    }

    #[test]
    fn oracle_matches_graph_expansion_randomized() {
        let mut rng = StdRng::seed_from_u64(20240229);
        let ctx = ctx();
        let catalog = GraphCatalog::new();
        for round in 0..6 {
            let dim = rng.gen_range(1..=2);
            let indices = rect_indices(rng.gen_range(0..=1), rng.gen_range(3..=4));
            let mut i = GradedFunctional::new(Arc::clone(&ctx), dim, indices.clone());
            for &(gi, gj) in indices.clone().iter() {
                if gj == 0 || rng.gen_bool(0.4) {
                    continue;
                }
                let mut part = SymFunctional::zero(dim, gj);
                // One random monomial per component.
                let mut alpha = vec![0u32; dim];
                for _ in 0..gj {
                    alpha[rng.gen_range(0..dim)] += 1;
                }
                let c = rat(rng.gen_range(-6..=6), rng.gen_range(1..=4));
                part.insert(alpha, ScaleFunction::constant(&ctx, c)).unwrap();
                i.set_component(gi, gj, part).unwrap();
            }
            let model = KernelModel {
                space: FieldSpace::new(dim).unwrap(),
                modes: (0..rng.gen_range(1..=2))
                    .map(|_| KernelMode {
                        vector: (0..dim).map(|_| rat_int(rng.gen_range(1..=2))).collect(),
                        profile: vec![(rat_int(1), rat(rng.gen_range(0..=3), 2))],
                    })
                    .collect(),
            };
            let p = propagator(&model, &ctx, 0, 1).unwrap();
            let by_graphs = w_graph(&i, &p, &catalog, &indices).unwrap();
            let by_series = w_oracle(&i, &p, &indices, None).unwrap();
            assert_eq!(by_graphs, by_series, "round {round}");
        }
    }

    #[test]
    fn truncation_is_stable_under_larger_cap() {
        let ctx = ctx();
        let i = cubic_quartic(&ctx, rat(1, 6), rat(1, 24));
        let p = propagator(&log_model(), &ctx, 0, 1).unwrap();
        let indices = rect_indices(2, 4);
        let cap = default_degree_cap(&indices);
        let base = w_oracle(&i, &p, &indices, Some(cap)).unwrap();
        let wider = w_oracle(&i, &p, &indices, Some(cap + 2)).unwrap();
        assert_eq!(base, wider);
    }
}
