//! The two counterterm constructions and their effective interactions: the
//! scale-by-scale recursion over the lexicographically well-ordered index
//! set, and the BPHZ recursion over graphs by edge count. Both produce
//! purely singular, length-scale-free counterterms, and both effective
//! families are assembled here for exact comparison.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::amplitude::{
    amplitude_with_subgraph, feynman_amplitude, push_symmetric, transport_from_canonical,
    LegTensor, SubgraphFunctional, w_graph,
};
use crate::error::{Error, Result};
use crate::graph::{
    aut_count, canonical_form, enumerate_subgraphs, index_closure, GraphCatalog, StableGraph,
};
use crate::model::{validate_interaction, GradedFunctional, Propagator, SymFunctional};
use crate::scale::{Rat, ScaleFunction};

/// Returns an error if the value involves any symbol other than the
/// regulator; counterterms must depend on the regulator alone.
fn assert_regulator_only(v: &ScaleFunction, what: &str) -> Result<()> {
    let ctx = v.context();
    for sym in 0..ctx.symbols().len() {
        if sym != ctx.regulator() && v.contains_symbol(sym) {
            return Err(Error::LDependenceViolation(format!(
                "{what} contains symbol `{}`",
                ctx.symbols()[sym]
            )));
        }
    }
    Ok(())
}

/// Counterterms indexed by (hbar order, degree), produced by the recursion
/// along the lexicographic well-ordering of the index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedCounterterms {
    dim: usize,
    terms: BTreeMap<(u32, u32), SymFunctional>,
}

impl IndexedCounterterms {
    pub fn term(&self, i: u32, j: u32) -> Option<&SymFunctional> {
        self.terms.get(&(i, j))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &SymFunctional)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The interaction minus every counterterm strictly below `before` in
    /// the lexicographic order (all of them if `before` is `None`), carried
    /// on the given index set.
    pub fn subtracted(
        &self,
        i: &GradedFunctional,
        indices: &BTreeSet<(u32, u32)>,
        before: Option<(u32, u32)>,
    ) -> Result<GradedFunctional> {
        let mut out = i.truncate(indices.clone());
        for (&(p, q), ct) in &self.terms {
            if let Some(stop) = before {
                if (p, q) >= stop {
                    break;
                }
            }
            if !indices.contains(&(p, q)) {
                continue;
            }
            out.set_component(p, q, out.component(p, q).checked_sub(ct)?)?;
        }
        Ok(out)
    }
}

/// Counterterms by the well-ordered recursion: at each index, the singular
/// part of that component of W applied to the interaction minus all earlier
/// counterterms. The recursion runs over the closure of the requested index
/// set under the vertex types occurring in its graphs, so that every vertex
/// decoration a later component needs is already subtracted.
pub fn indexed_counterterms(
    i: &GradedFunctional,
    p: &Propagator,
    catalog: &GraphCatalog,
    indices: &BTreeSet<(u32, u32)>,
) -> Result<IndexedCounterterms> {
    validate_interaction(i)?;
    let closed = index_closure(catalog, indices);
    let mut acc = IndexedCounterterms { dim: i.dim(), terms: BTreeMap::new() };
    for &(gi, gj) in &closed {
        let current = acc.subtracted(i, &closed, Some((gi, gj)))?;
        let single: BTreeSet<(u32, u32)> = [(gi, gj)].into_iter().collect();
        let w = w_graph(&current, p, catalog, &single)?;
        let ct = w.component(gi, gj).map(|v| v.sing());
        if ct.is_zero() {
            continue;
        }
        for (_, v) in ct.terms() {
            assert_regulator_only(v, &format!("counterterm at ({gi},{gj})"))?;
            debug_assert_eq!(v.sing(), v.clone(), "counterterm must be purely singular");
        }
        acc.terms.insert((gi, gj), ct);
    }
    Ok(acc)
}

/// Effective interaction of the well-ordered construction: the regulator
/// limit of W at the fully subtracted interaction. Returned on the closed
/// index set; truncate to taste.
pub fn indexed_effective(
    i: &GradedFunctional,
    p: &Propagator,
    catalog: &GraphCatalog,
    ct: &IndexedCounterterms,
    indices: &BTreeSet<(u32, u32)>,
) -> Result<GradedFunctional> {
    let closed = index_closure(catalog, indices);
    let current = ct.subtracted(i, &closed, None)?;
    let w = w_graph(&current, p, catalog, &closed)?;
    w.try_map(|v| v.limit_regulator_zero())
}

/// Per-graph counterterm table of the BPHZ recursion, keyed by canonical
/// form, with tensors stored in canonical leg order. Edgeless graphs have
/// counterterm zero and are not stored.
#[derive(Debug, Clone, Default)]
pub struct BphzTable {
    entries: HashMap<String, LegTensor>,
}

/// Rewrites a leg tensor of `graph` into the slot order of its canonical
/// form, returning the canonical key as well.
fn transport_to_canonical(graph: &StableGraph, t: &LegTensor) -> (String, LegTensor) {
    let canon = canonical_form(graph);
    let canon_legs = canon.cert.graph.legs();
    let perm: Vec<usize> = graph
        .legs()
        .iter()
        .map(|&l| canon_legs.binary_search(&canon.relabel[l]).expect("leg maps to leg"))
        .collect();
    (canon.cert.graph.to_string(), t.permute_slots(&perm))
}

impl BphzTable {
    pub fn new() -> Self {
        BphzTable::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored entries: canonical graph text to the tensor in canonical leg
    /// order.
    pub fn entries(&self) -> impl Iterator<Item = (&String, &LegTensor)> {
        self.entries.iter()
    }

    fn insert(&mut self, graph: &StableGraph, tensor: LegTensor) {
        let (key, stored) = transport_to_canonical(graph, &tensor);
        self.entries.insert(key, stored);
    }

    fn lookup_connected(&self, graph: &StableGraph, dim: usize) -> Result<LegTensor> {
        if graph.edge_count() == 0 {
            return Ok(LegTensor::zero(dim, graph.leg_count()));
        }
        let canon = canonical_form(graph);
        let key = canon.cert.graph.to_string();
        let stored = self
            .entries
            .get(&key)
            .ok_or_else(|| Error::MissingDependency(key.clone()))?;
        Ok(transport_from_canonical(graph, stored))
    }

    /// The counterterm tensor of an arbitrary stable graph in its own leg
    /// order: table lookup with equivariant transport for connected graphs,
    /// tensor product over components otherwise.
    pub fn counterterm(&self, graph: &StableGraph, dim: usize) -> Result<LegTensor> {
        if graph.is_connected() {
            return self.lookup_connected(graph, dim);
        }
        // Tensor the components together, tracking which parent leg each
        // product slot stands for, then permute into the parent leg order.
        let mut acc: Option<LegTensor> = None;
        let mut slot_parent: Vec<usize> = Vec::new();
        for comp in graph.split_components() {
            let t = self.lookup_connected(&comp.graph, dim)?;
            acc = Some(match acc {
                Some(prev) => prev.tensor(&t)?,
                None => t,
            });
            for &l in comp.graph.legs() {
                slot_parent.push(comp.parent_he[l]);
            }
        }
        let acc = acc.unwrap_or_else(|| LegTensor::zero(dim, 0));
        let parent_legs = graph.legs();
        let perm: Vec<usize> = slot_parent
            .iter()
            .map(|ph| parent_legs.binary_search(ph).expect("component leg is a parent leg"))
            .collect();
        Ok(acc.permute_slots(&perm))
    }
}

/// View of a table as a subgraph-replacement functional.
pub struct CtFunctional<'a> {
    pub table: &'a BphzTable,
    pub dim: usize,
}

impl SubgraphFunctional for CtFunctional<'_> {
    fn component_tensor(&self, component: &StableGraph) -> Result<LegTensor> {
        self.table.counterterm(component, self.dim)
    }
}

/// The subtracted amplitude of a graph: its amplitude plus, for every
/// nonempty proper subgraph, the amplitude with that subgraph replaced by
/// the counterterm functional.
pub fn r_bar(
    graph: &StableGraph,
    table: &BphzTable,
    i: &GradedFunctional,
    p: &Propagator,
) -> Result<LegTensor> {
    let nu = CtFunctional { table, dim: i.dim() };
    let mut acc = feynman_amplitude(graph, i, p)?;
    for sub in enumerate_subgraphs(graph, true) {
        acc = acc.checked_add(&amplitude_with_subgraph(graph, &sub, &nu, i, p)?)?;
    }
    Ok(acc)
}

/// Builds the per-graph counterterm table over all connected graphs whose
/// index lies in the closure of the requested index set, in increasing edge
/// count: the counterterm is minus the singular part of the subtracted
/// amplitude, and must be free of every non-regulator symbol.
pub fn bphz_counterterms(
    i: &GradedFunctional,
    p: &Propagator,
    catalog: &GraphCatalog,
    indices: &BTreeSet<(u32, u32)>,
) -> Result<BphzTable> {
    validate_interaction(i)?;
    let closed = index_closure(catalog, indices);
    let mut graphs: Vec<StableGraph> = Vec::new();
    for &(gi, gj) in &closed {
        graphs.extend(catalog.connected(gi, gj).iter().cloned());
    }
    graphs.sort_by_key(|g| g.edge_count());
    let mut table = BphzTable::new();
    for graph in &graphs {
        if graph.edge_count() == 0 {
            continue;
        }
        let rb = r_bar(graph, &table, i, p)?;
        let c = rb.map(|v| -&v.sing());
        for (_, v) in c.terms() {
            assert_regulator_only(v, &format!("counterterm of {graph}"))?;
        }
        table.insert(graph, c);
    }
    Ok(table)
}

/// The regulator limit of the subtracted amplitude plus the counterterm;
/// exists whenever the table was built consistently.
pub fn renormalized_amplitude(
    graph: &StableGraph,
    table: &BphzTable,
    i: &GradedFunctional,
    p: &Propagator,
) -> Result<LegTensor> {
    let rb = r_bar(graph, table, i, p)?;
    let c = table.counterterm(graph, i.dim())?;
    rb.checked_add(&c)?.try_map(|v| v.limit_regulator_zero())
}

/// Effective interaction assembled from renormalized amplitudes: each
/// component is the interaction term plus the renormalized amplitudes of
/// all connected graphs there with at least one edge, weighted by inverse
/// automorphism counts. Returned on the closed index set.
pub fn bphz_effective(
    i: &GradedFunctional,
    p: &Propagator,
    catalog: &GraphCatalog,
    table: &BphzTable,
    indices: &BTreeSet<(u32, u32)>,
) -> Result<GradedFunctional> {
    let closed = index_closure(catalog, indices);
    let mut out = GradedFunctional::new(Arc::clone(i.context()), i.dim(), closed.clone());
    for &(gi, gj) in &closed {
        let mut part = i.component(gi, gj);
        for graph in catalog.connected(gi, gj).iter() {
            if graph.edge_count() == 0 {
                continue;
            }
            let r = renormalized_amplitude(graph, table, i, p)?;
            if r.is_zero() {
                continue;
            }
            let aut = Rat::from_integer(aut_count(graph).into());
            part = part.checked_add(&push_symmetric(&r).scale(&aut.recip()))?;
        }
        out.set_component(gi, gj, part)?;
    }
    Ok(out)
}

/// One comparison at a single index; the difference is exact and empty on
/// success.
#[derive(Debug, Clone)]
pub struct IndexCheck {
    pub index: (u32, u32),
    pub pass: bool,
    pub difference: SymFunctional,
}

/// Exact comparison of the two constructions: (a) the per-index counterterm
/// equals minus the automorphism-weighted sum of per-graph counterterms;
/// (b) each component of W at the partially subtracted interaction equals
/// the interaction term plus the automorphism-weighted subtracted
/// amplitudes.
#[derive(Debug, Clone)]
pub struct EqualityReport {
    pub counterterm_checks: Vec<IndexCheck>,
    pub intermediate_checks: Vec<IndexCheck>,
}

impl EqualityReport {
    pub fn all_pass(&self) -> bool {
        self.counterterm_checks.iter().chain(&self.intermediate_checks).all(|c| c.pass)
    }
}

pub fn verify_counterterm_equality(
    i: &GradedFunctional,
    p: &Propagator,
    catalog: &GraphCatalog,
    ct: &IndexedCounterterms,
    table: &BphzTable,
    indices: &BTreeSet<(u32, u32)>,
) -> Result<EqualityReport> {
    let closed = index_closure(catalog, indices);
    let dim = i.dim();
    let mut counterterm_checks = Vec::new();
    let mut intermediate_checks = Vec::new();
    for &(gi, gj) in indices {
        // (a) indexed counterterm against the graph aggregate.
        let mut agg = SymFunctional::zero(dim, gj);
        for graph in catalog.connected(gi, gj).iter() {
            if graph.edge_count() == 0 {
                continue;
            }
            let c = table.counterterm(graph, dim)?;
            let aut = Rat::from_integer(aut_count(graph).into());
            agg = agg.checked_add(&push_symmetric(&c).scale(&aut.recip()))?;
        }
        let lhs = ct.term(gi, gj).cloned().unwrap_or_else(|| SymFunctional::zero(dim, gj));
        // Identity: lhs = -agg, so the difference is lhs + agg.
        let difference = lhs.checked_add(&agg)?;
        counterterm_checks.push(IndexCheck {
            index: (gi, gj),
            pass: difference.is_zero(),
            difference,
        });

        // (b) the component of W at the interaction subtracted below this
        // index against the subtracted-amplitude aggregate.
        let current = ct.subtracted(i, &closed, Some((gi, gj)))?;
        let single: BTreeSet<(u32, u32)> = [(gi, gj)].into_iter().collect();
        let w = w_graph(&current, p, catalog, &single)?;
        let mut rhs = i.component(gi, gj);
        for graph in catalog.connected(gi, gj).iter() {
            if graph.edge_count() == 0 {
                continue;
            }
            let rb = r_bar(graph, table, i, p)?;
            let aut = Rat::from_integer(aut_count(graph).into());
            rhs = rhs.checked_add(&push_symmetric(&rb).scale(&aut.recip()))?;
        }
        let difference = w.component(gi, gj).checked_sub(&rhs)?;
        intermediate_checks.push(IndexCheck {
            index: (gi, gj),
            pass: difference.is_zero(),
            difference,
        });
    }
    Ok(EqualityReport { counterterm_checks, intermediate_checks })
}

/// Subgraph functional carrying the subtracted amplitude plus counterterm
/// at a fixed propagator; used in the scale-splitting identity.
pub struct SubtractedPlusCt<'a> {
    pub table: &'a BphzTable,
    pub i: &'a GradedFunctional,
    pub p: &'a Propagator,
}

impl SubgraphFunctional for SubtractedPlusCt<'_> {
    fn component_tensor(&self, component: &StableGraph) -> Result<LegTensor> {
        let rb = r_bar(component, self.table, self.i, self.p)?;
        rb.checked_add(&self.table.counterterm(component, self.i.dim())?)
    }
}

/// The splitting of the subtracted amplitude across an intermediate scale:
/// with `p_full = p_low + p_high` (regulator-to-scale, regulator-to-split,
/// split-to-scale), the subtracted amplitude at `p_full` equals its value
/// at `p_low`, plus the plain amplitude at `p_high`, plus the replaced
/// amplitudes at `p_high` with every nonempty proper subgraph carrying the
/// subtracted-plus-counterterm functional at `p_low`. Returns both sides.
pub fn scale_split_identity(
    graph: &StableGraph,
    table: &BphzTable,
    i: &GradedFunctional,
    p_full: &Propagator,
    p_low: &Propagator,
    p_high: &Propagator,
) -> Result<(LegTensor, LegTensor)> {
    let lhs = r_bar(graph, table, i, p_full)?;
    let mut rhs = r_bar(graph, table, i, p_low)?;
    rhs = rhs.checked_add(&feynman_amplitude(graph, i, p_high)?)?;
    let nu = SubtractedPlusCt { table, i, p: p_low };
    for sub in enumerate_subgraphs(graph, true) {
        rhs = rhs.checked_add(&amplitude_with_subgraph(graph, &sub, &nu, i, p_high)?)?;
    }
    Ok((lhs, rhs))
}
