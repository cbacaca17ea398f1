//! The finite-dimensional field model: an n-dimensional field space,
//! propagators built by integrating power-law kernel profiles over a proper-
//! time window, and interactions as graded collections of symmetric
//! polynomial functionals with exact scale-function coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scale::{integrate_power, Rat, ScaleContext, ScaleFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpace {
    pub dim: usize,
}

impl FieldSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("field dimension must be at least 1".into()));
        }
        Ok(FieldSpace { dim })
    }
}

/// One spectral direction with kernel contribution `sum_r c_r t^{-a_r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelMode {
    pub vector: Vec<Rat>,
    pub profile: Vec<(Rat, Rat)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelModel {
    pub space: FieldSpace,
    pub modes: Vec<KernelMode>,
}

impl KernelModel {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Config("kernel model needs at least one mode".into()));
        }
        for mode in &self.modes {
            if mode.vector.len() != self.space.dim {
                return Err(Error::Config("mode vector length must equal the field dimension".into()));
            }
            if mode.vector.iter().all(|c| c.is_zero()) {
                return Err(Error::Config("mode vector must be nonzero".into()));
            }
            if mode.profile.is_empty() {
                return Err(Error::Config("mode profile must be nonempty".into()));
            }
        }
        Ok(())
    }
}

/// Symmetric n x n matrix of scale functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagator {
    dim: usize,
    entries: Vec<ScaleFunction>,
}

impl Propagator {
    pub fn new(dim: usize, entries: Vec<ScaleFunction>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Config("propagator matrix has wrong size".into()));
        }
        for a in 0..dim {
            for b in (a + 1)..dim {
                if entries[a * dim + b] != entries[b * dim + a] {
                    return Err(Error::Config("propagator matrix must be symmetric".into()));
                }
            }
        }
        Ok(Propagator { dim, entries })
    }

    pub fn zero(ctx: &Arc<ScaleContext>, dim: usize) -> Self {
        Propagator { dim, entries: vec![ScaleFunction::zero(ctx); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, a: usize, b: usize) -> &ScaleFunction {
        &self.entries[a * self.dim + b]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn checked_add(&self, other: &Propagator) -> Result<Propagator> {
        if self.dim != other.dim {
            return Err(Error::GradedMismatch);
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        Ok(Propagator { dim: self.dim, entries })
    }

    pub fn neg(&self) -> Propagator {
        Propagator { dim: self.dim, entries: self.entries.iter().map(|e| -e).collect() }
    }
}

/// `P(lo, hi)`: integrate each mode's profile over the window and spread it
/// over the rank-one matrix of the mode vector.
pub fn propagator(
    model: &KernelModel,
    ctx: &Arc<ScaleContext>,
    lo: usize,
    hi: usize,
) -> Result<Propagator> {
    model.validate()?;
    let n = model.space.dim;
    let mut entries = vec![ScaleFunction::zero(ctx); n * n];
    for mode in &model.modes {
        let mut weight = ScaleFunction::zero(ctx);
        for (c, a) in &mode.profile {
            weight = weight.checked_add(&integrate_power(ctx, c, a, lo, hi))?;
        }
        for a in 0..n {
            for b in 0..n {
                let contrib = weight.scale(&(&mode.vector[a] * &mode.vector[b]));
                entries[a * n + b] = entries[a * n + b].checked_add(&contrib)?;
            }
        }
    }
    Propagator::new(n, entries)
}

/// A degree-j symmetric functional as polynomial coefficients: the value on
/// a field `phi` is `sum_alpha p_alpha phi^alpha` over degree-j multi-indices
/// `alpha` in n variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymFunctional {
    dim: usize,
    degree: u32,
    coeffs: BTreeMap<Vec<u32>, ScaleFunction>,
}

impl SymFunctional {
    pub fn zero(dim: usize, degree: u32) -> Self {
        SymFunctional { dim, degree, coeffs: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn insert(&mut self, alpha: Vec<u32>, value: ScaleFunction) -> Result<()> {
        if alpha.len() != self.dim || alpha.iter().sum::<u32>() != self.degree {
            return Err(Error::Config("multi-index does not match functional shape".into()));
        }
        if value.is_zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, value);
        }
        Ok(())
    }

    pub fn add_term(&mut self, alpha: &[u32], value: &ScaleFunction) -> Result<()> {
        let current = self.coeffs.get(alpha);
        let next = match current {
            Some(c) => c.checked_add(value)?,
            None => value.clone(),
        };
        self.insert(alpha.to_vec(), next)
    }

    pub fn coeff(&self, alpha: &[u32]) -> Option<&ScaleFunction> {
        self.coeffs.get(alpha)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &ScaleFunction)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn checked_add(&self, other: &SymFunctional) -> Result<SymFunctional> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::GradedMismatch);
        }
        let mut out = self.clone();
        for (alpha, v) in &other.coeffs {
            out.add_term(alpha, v)?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SymFunctional) -> Result<SymFunctional> {
        self.checked_add(&other.map(|v| -v))
    }

    pub fn scale(&self, c: &Rat) -> SymFunctional {
        if c.is_zero() {
            return SymFunctional::zero(self.dim, self.degree);
        }
        self.map(|v| v.scale(c))
    }

    /// Applies an exact coefficientwise transform, dropping zeros.
    pub fn map(&self, f: impl Fn(&ScaleFunction) -> ScaleFunction) -> SymFunctional {
        let mut out = SymFunctional::zero(self.dim, self.degree);
        for (alpha, v) in &self.coeffs {
            let w = f(v);
            if !w.is_zero() {
                out.coeffs.insert(alpha.clone(), w);
            }
        }
        out
    }

    /// Like `map` for transforms that can fail (e.g. regulator limits).
    pub fn try_map(
        &self,
        f: impl Fn(&ScaleFunction) -> Result<ScaleFunction>,
    ) -> Result<SymFunctional> {
        let mut out = SymFunctional::zero(self.dim, self.degree);
        for (alpha, v) in &self.coeffs {
            let w = f(v)?;
            if !w.is_zero() {
                out.coeffs.insert(alpha.clone(), w);
            }
        }
        Ok(out)
    }

    pub fn contains_symbol(&self, symbol: usize) -> bool {
        self.coeffs.values().any(|v| v.contains_symbol(symbol))
    }
}

/// Interaction indices that stability permits: genus-zero components must
/// have degree at least three; higher genus allows constants as well.
pub fn valid_index(i: u32, j: u32) -> bool {
    i >= 1 || j >= 3
}

/// The truncation rectangle `i <= gmax, j <= dmax` restricted to valid
/// indices.
pub fn rect_indices(gmax: u32, dmax: u32) -> BTreeSet<(u32, u32)> {
    (0..=gmax)
        .flat_map(|i| (0..=dmax).map(move |j| (i, j)))
        .filter(|&(i, j)| valid_index(i, j))
        .collect()
}

/// A finitely supported family of symmetric functionals indexed by
/// (hbar order, degree), truncated to an explicit index set. Degree-zero
/// components are the constant terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedFunctional {
    ctx: Arc<ScaleContext>,
    dim: usize,
    indices: BTreeSet<(u32, u32)>,
    parts: BTreeMap<(u32, u32), SymFunctional>,
}

impl GradedFunctional {
    pub fn new(ctx: Arc<ScaleContext>, dim: usize, indices: BTreeSet<(u32, u32)>) -> Self {
        GradedFunctional { ctx, dim, indices, parts: BTreeMap::new() }
    }

    pub fn context(&self) -> &Arc<ScaleContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &BTreeSet<(u32, u32)> {
        &self.indices
    }

    pub fn set_component(&mut self, i: u32, j: u32, part: SymFunctional) -> Result<()> {
        if part.dim != self.dim || part.degree != j {
            return Err(Error::GradedMismatch);
        }
        if !self.indices.contains(&(i, j)) {
            return Err(Error::Config(format!("index ({i},{j}) outside the truncation set")));
        }
        if part.is_zero() {
            self.parts.remove(&(i, j));
        } else {
            self.parts.insert((i, j), part);
        }
        Ok(())
    }

    pub fn component(&self, i: u32, j: u32) -> SymFunctional {
        self.parts.get(&(i, j)).cloned().unwrap_or_else(|| SymFunctional::zero(self.dim, j))
    }

    pub fn components(&self) -> impl Iterator<Item = (&(u32, u32), &SymFunctional)> {
        self.parts.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn checked_add(&self, other: &GradedFunctional) -> Result<GradedFunctional> {
        self.merge(other, SymFunctional::checked_add)
    }

    pub fn checked_sub(&self, other: &GradedFunctional) -> Result<GradedFunctional> {
        self.merge(other, SymFunctional::checked_sub)
    }

    fn merge(
        &self,
        other: &GradedFunctional,
        op: impl Fn(&SymFunctional, &SymFunctional) -> Result<SymFunctional>,
    ) -> Result<GradedFunctional> {
        if self.dim != other.dim || self.indices != other.indices {
            return Err(Error::GradedMismatch);
        }
        let mut out = GradedFunctional::new(Arc::clone(&self.ctx), self.dim, self.indices.clone());
        let keys: BTreeSet<(u32, u32)> =
            self.parts.keys().chain(other.parts.keys()).copied().collect();
        for (i, j) in keys {
            out.set_component(i, j, op(&self.component(i, j), &other.component(i, j))?)?;
        }
        Ok(out)
    }

    /// Restricts to another index set, dropping components outside it.
    pub fn truncate(&self, indices: BTreeSet<(u32, u32)>) -> GradedFunctional {
        let parts = self
            .parts
            .iter()
            .filter(|(k, _)| indices.contains(k))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        GradedFunctional { ctx: Arc::clone(&self.ctx), dim: self.dim, indices, parts }
    }

    pub fn map(&self, f: impl Fn(&ScaleFunction) -> ScaleFunction) -> GradedFunctional {
        let mut out = GradedFunctional::new(Arc::clone(&self.ctx), self.dim, self.indices.clone());
        for (&(i, j), part) in &self.parts {
            out.set_component(i, j, part.map(&f)).expect("shape preserved");
        }
        out
    }

    pub fn try_map(
        &self,
        f: impl Fn(&ScaleFunction) -> Result<ScaleFunction>,
    ) -> Result<GradedFunctional> {
        let mut out = GradedFunctional::new(Arc::clone(&self.ctx), self.dim, self.indices.clone());
        for (&(i, j), part) in &self.parts {
            out.set_component(i, j, part.try_map(&f)?)?;
        }
        Ok(out)
    }

    pub fn contains_symbol(&self, symbol: usize) -> bool {
        self.parts.values().any(|p| p.contains_symbol(symbol))
    }
}

/// Interactions must have no constant, linear, or quadratic classical part.
pub fn validate_interaction(i: &GradedFunctional) -> Result<()> {
    for &(p, q) in i.parts.keys() {
        if !valid_index(p, q) {
            return Err(Error::InvalidInteraction(p, q));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{rat, rat_int};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx3() -> Arc<ScaleContext> {
        ScaleContext::new(&["eps", "L0", "L"], 0).unwrap()
    }

    fn single_mode_model() -> KernelModel {
        KernelModel {
            space: FieldSpace::new(1).unwrap(),
            modes: vec![KernelMode { vector: vec![rat_int(1)], profile: vec![(rat_int(1), rat_int(1))] }],
        }
    }

    fn random_model(rng: &mut StdRng) -> KernelModel {
        let dim = rng.gen_range(1..=2);
        let modes = (0..rng.gen_range(1..=2))
            .map(|_| KernelMode {
                vector: (0..dim).map(|_| rat_int(rng.gen_range(1..=3))).collect(),
                profile: (0..rng.gen_range(1..=2))
                    .map(|_| (rat(rng.gen_range(1..=4), 2), rat(rng.gen_range(0..=4), 2)))
                    .collect(),
            })
            .collect();
        KernelModel { space: FieldSpace::new(dim).unwrap(), modes }
    }

    #[test]
    fn log_window_propagator() {
        let ctx = ctx3();
        let p = propagator(&single_mode_model(), &ctx, 0, 2).unwrap();
        let expected = &ScaleFunction::log_symbol(&ctx, 2) - &ScaleFunction::log_symbol(&ctx, 0);
        assert_eq!(*p.entry(0, 0), expected);
    }

    #[test]
    fn window_additivity_and_antisymmetry() {
        let ctx = ctx3();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let model = random_model(&mut rng);
            let full = propagator(&model, &ctx, 0, 2).unwrap();
            let low = propagator(&model, &ctx, 0, 1).unwrap();
            let high = propagator(&model, &ctx, 1, 2).unwrap();
            assert_eq!(full, low.checked_add(&high).unwrap());
            let swapped = propagator(&model, &ctx, 2, 0).unwrap();
            assert_eq!(swapped, full.neg());
        }
    }

    #[test]
    fn propagator_is_symmetric() {
        let ctx = ctx3();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let p = propagator(&random_model(&mut rng), &ctx, 0, 2).unwrap();
            for a in 0..p.dim() {
                for b in 0..p.dim() {
                    assert_eq!(p.entry(a, b), p.entry(b, a));
                }
            }
        }
    }

    fn constant_part(ctx: &Arc<ScaleContext>, dim: usize, degree: u32, alpha: Vec<u32>, c: Rat) -> SymFunctional {
        let mut f = SymFunctional::zero(dim, degree);
        f.insert(alpha, ScaleFunction::constant(ctx, c)).unwrap();
        f
    }

    #[test]
    fn interaction_validity() {
        let ctx = ctx3();
        let indices: BTreeSet<(u32, u32)> = [(0, 2), (0, 3), (0, 4), (1, 0)].into_iter().collect();
        let mut ok = GradedFunctional::new(Arc::clone(&ctx), 1, indices.clone());
        ok.set_component(0, 3, constant_part(&ctx, 1, 3, vec![3], rat(1, 6))).unwrap();
        ok.set_component(0, 4, constant_part(&ctx, 1, 4, vec![4], rat(1, 24))).unwrap();
        assert!(validate_interaction(&ok).is_ok());

        let mut with_constant = ok.clone();
        with_constant.set_component(1, 0, constant_part(&ctx, 1, 0, vec![0], rat_int(5))).unwrap();
        assert!(validate_interaction(&with_constant).is_ok());

        let mut bad = ok;
        bad.set_component(0, 2, constant_part(&ctx, 1, 2, vec![2], rat_int(1))).unwrap();
        assert!(matches!(validate_interaction(&bad), Err(Error::InvalidInteraction(0, 2))));
    }

    #[test]
    fn graded_group_laws() {
        let ctx = ctx3();
        let mut rng = StdRng::seed_from_u64(3);
        let indices = rect_indices(1, 4);
        for _ in 0..10 {
            let mut random = || {
                let mut g = GradedFunctional::new(Arc::clone(&ctx), 1, indices.clone());
                for &(i, j) in &indices {
                    if rng.gen_bool(0.5) {
                        let c = rat_int(rng.gen_range(-3..=3));
                        g.set_component(i, j, constant_part(&ctx, 1, j, vec![j], c)).unwrap();
                    }
                }
                g
            };
            let a = random();
            let b = random();
            let zero = GradedFunctional::new(Arc::clone(&ctx), 1, indices.clone());
            assert_eq!(a.checked_sub(&zero).unwrap(), a);
            assert_eq!(a.checked_add(&b).unwrap().checked_sub(&b).unwrap(), a);
        }
    }

    #[test]
    fn component_extraction() {
        let ctx = ctx3();
        let indices = rect_indices(1, 4);
        let mut g = GradedFunctional::new(Arc::clone(&ctx), 1, indices);
        let part = constant_part(&ctx, 1, 3, vec![3], rat(2, 7));
        g.set_component(0, 3, part.clone()).unwrap();
        assert_eq!(g.component(0, 3), part);
        assert!(g.component(1, 2).is_zero());
    }

    #[test]
    fn rect_excludes_unstable_slots() {
        let r = rect_indices(2, 4);
        assert!(!r.contains(&(0, 0)));
        assert!(!r.contains(&(0, 2)));
        assert!(r.contains(&(0, 3)));
        assert!(r.contains(&(1, 0)));
        assert!(r.contains(&(2, 4)));
    }
}
