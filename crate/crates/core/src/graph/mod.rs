//! Stable graphs: half-edges partitioned into genus-labeled vertices, a leg
//! subset, and a perfect matching of the rest into edges. Genus-zero vertices
//! must be at least trivalent.
//!
//! Subgraphs are edge subsets. Contracting a subgraph collapses each of its
//! connected components to a vertex carrying the component's genus; inserting
//! a graph into a vertex is the inverse operation.

mod canon;
mod enumerate;

pub use canon::{
    aut_count, aut_count_colored, aut_count_pair, aut_count_triple, automorphisms,
    canonical_form, canonical_form_colored, isomorphisms, CanonicalCert, Canonicalization,
};
pub use enumerate::{
    brute_force_connected, enumerate_connected, enumerate_subgraphs, index_closure,
    orbit_count_check, reassemble_triple, GraphCatalog,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub genus: u32,
    /// Sorted half-edge indices.
    pub half_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableGraph {
    half_edge_count: usize,
    vertices: Vec<Vertex>,
    /// Sorted.
    legs: Vec<usize>,
    /// Each pair `(a, b)` with `a < b`; pairs sorted.
    edges: Vec<(usize, usize)>,
}

impl StableGraph {
    pub fn new(
        half_edge_count: usize,
        vertices: Vec<(u32, Vec<usize>)>,
        legs: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut vertices: Vec<Vertex> = vertices
            .into_iter()
            .map(|(genus, mut hs)| {
                hs.sort_unstable();
                Vertex { genus, half_edges: hs }
            })
            .collect();
        vertices.sort();
        let mut legs = legs;
        legs.sort_unstable();
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        let g = StableGraph { half_edge_count, vertices, legs, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.half_edge_count;
        let mut seen = vec![false; h];
        for v in &self.vertices {
            if v.half_edges.is_empty() {
                return Err(Error::InvalidGraph("empty vertex".into()));
            }
            for &x in &v.half_edges {
                if x >= h || seen[x] {
                    return Err(Error::InvalidGraph("vertex partition invalid".into()));
                }
                seen[x] = true;
            }
            if v.genus == 0 && v.half_edges.len() < 3 {
                return Err(Error::InvalidGraph("genus-zero vertex below trivalent".into()));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGraph("half-edge not covered by a vertex".into()));
        }
        let mut matched = vec![false; h];
        for &(a, b) in &self.edges {
            if a == b || a >= h || b >= h || matched[a] || matched[b] {
                return Err(Error::InvalidGraph("edge matching invalid".into()));
            }
            matched[a] = true;
            matched[b] = true;
        }
        let leg_set: BTreeSet<usize> = self.legs.iter().copied().collect();
        if leg_set.len() != self.legs.len() {
            return Err(Error::InvalidGraph("duplicate leg".into()));
        }
        for &l in &self.legs {
            if l >= h || matched[l] {
                return Err(Error::InvalidGraph("leg overlaps an edge".into()));
            }
        }
        if leg_set.len() + 2 * self.edges.len() != h {
            return Err(Error::InvalidGraph("legs and edges do not cover the half-edges".into()));
        }
        Ok(())
    }

    pub fn half_edge_count(&self) -> usize {
        self.half_edge_count
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    pub fn is_leg(&self, he: usize) -> bool {
        self.legs.binary_search(&he).is_ok()
    }

    /// `vertex_of()[he]` is the index of the vertex containing `he`.
    pub fn vertex_of(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.half_edge_count];
        for (vi, v) in self.vertices.iter().enumerate() {
            for &x in &v.half_edges {
                out[x] = vi;
            }
        }
        out
    }

    pub fn is_loop(&self, edge: usize) -> bool {
        let vo = self.vertex_of();
        let (a, b) = self.edges[edge];
        vo[a] == vo[b]
    }

    /// Vertex index sets of the connected components.
    pub fn component_vertex_sets(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        let vo = self.vertex_of();
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, vo[a]), find(&mut parent, vo[b]));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        !self.vertices.is_empty() && self.component_vertex_sets().len() == 1
    }

    /// First Betti number plus the sum of vertex genera; for disconnected
    /// input this is the sum of the component genera.
    pub fn genus(&self) -> u32 {
        if self.vertices.is_empty() {
            return 0;
        }
        let comps = self.component_vertex_sets().len() as i64;
        let b1 = self.edges.len() as i64 - self.vertices.len() as i64 + comps;
        let gsum: u32 = self.vertices.iter().map(|v| v.genus).sum();
        b1 as u32 + gsum
    }

    /// Applies a half-edge relabeling: half-edge `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<StableGraph> {
        StableGraph::new(
            self.half_edge_count,
            self.vertices
                .iter()
                .map(|v| (v.genus, v.half_edges.iter().map(|&x| perm[x]).collect()))
                .collect(),
            self.legs.iter().map(|&x| perm[x]).collect(),
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
        )
    }

    /// Contracts one edge: a loop bumps the genus of its vertex, a non-loop
    /// merges the incident vertices and sums their genera.
    pub fn contract_edge(&self, edge: usize) -> Result<StableGraph> {
        let (a, b) = self.edges[edge];
        let vo = self.vertex_of();
        let (va, vb) = (vo[a], vo[b]);
        let mut vertices: Vec<(u32, Vec<usize>)> = Vec::new();
        if va == vb {
            for (vi, v) in self.vertices.iter().enumerate() {
                let hs: Vec<usize> =
                    v.half_edges.iter().copied().filter(|&x| x != a && x != b).collect();
                let genus = if vi == va { v.genus + 1 } else { v.genus };
                if hs.is_empty() {
                    if vi == va {
                        return Err(Error::EmptyVertex);
                    }
                    unreachable!("non-incident vertex lost half-edges");
                }
                vertices.push((genus, hs));
            }
        } else {
            let mut merged: Vec<usize> = Vec::new();
            let mut merged_genus = 0;
            for (vi, v) in self.vertices.iter().enumerate() {
                if vi == va || vi == vb {
                    merged.extend(v.half_edges.iter().copied().filter(|&x| x != a && x != b));
                    merged_genus += v.genus;
                } else {
                    vertices.push((v.genus, v.half_edges.clone()));
                }
            }
            if merged.is_empty() {
                return Err(Error::EmptyVertex);
            }
            vertices.push((merged_genus, merged));
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != edge)
            .map(|(_, &e)| e)
            .collect();
        compacted(self.half_edge_count, vertices, self.legs.clone(), edges, &[a, b]).map(|(g, _)| g)
    }

    /// Splits into connected components; each comes with the map from its
    /// compact half-edge indices back to this graph's indices.
    pub fn split_components(&self) -> Vec<ExtractedComponent> {
        self.component_vertex_sets()
            .into_iter()
            .map(|vset| {
                let vin: BTreeSet<usize> = vset.iter().copied().collect();
                let hes: Vec<usize> = self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(vi, _)| vin.contains(vi))
                    .flat_map(|(_, v)| v.half_edges.iter().copied())
                    .collect();
                let mut parent_he: Vec<usize> = hes;
                parent_he.sort_unstable();
                let local: BTreeMap<usize, usize> =
                    parent_he.iter().enumerate().map(|(i, &x)| (x, i)).collect();
                let graph = StableGraph::new(
                    parent_he.len(),
                    vset.iter()
                        .map(|&vi| {
                            let v = &self.vertices[vi];
                            (v.genus, v.half_edges.iter().map(|x| local[x]).collect())
                        })
                        .collect(),
                    self.legs.iter().filter(|l| local.contains_key(l)).map(|l| local[l]).collect(),
                    self.edges
                        .iter()
                        .filter(|(a, _)| local.contains_key(a))
                        .map(|&(a, b)| (local[&a], local[&b]))
                        .collect(),
                )
                .expect("component of a valid graph is valid");
                ExtractedComponent { graph, parent_he }
            })
            .collect()
    }

    /// The stable graph carried by a subgraph: the vertices meeting the
    /// chosen edges, with the unmatched half-edges among them as legs.
    pub fn induced_subgraph(&self, edge_subset: &[usize]) -> ExtractedComponent {
        let chosen: BTreeSet<usize> = edge_subset.iter().copied().collect();
        let vo = self.vertex_of();
        let mut vset: BTreeSet<usize> = BTreeSet::new();
        for &e in &chosen {
            let (a, b) = self.edges[e];
            vset.insert(vo[a]);
            vset.insert(vo[b]);
        }
        let mut parent_he: Vec<usize> = vset
            .iter()
            .flat_map(|&vi| self.vertices[vi].half_edges.iter().copied())
            .collect();
        parent_he.sort_unstable();
        let local: BTreeMap<usize, usize> =
            parent_he.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let edges: Vec<(usize, usize)> =
            chosen.iter().map(|&e| (local[&self.edges[e].0], local[&self.edges[e].1])).collect();
        let matched: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let legs: Vec<usize> = (0..parent_he.len()).filter(|x| !matched.contains(x)).collect();
        let graph = StableGraph::new(
            parent_he.len(),
            vset.iter()
                .map(|&vi| {
                    let v = &self.vertices[vi];
                    (v.genus, v.half_edges.iter().map(|x| local[x]).collect())
                })
                .collect(),
            legs,
            edges,
        )
        .expect("induced subgraph of a valid graph is valid");
        ExtractedComponent { graph, parent_he }
    }

    /// Contracts every edge of the subgraph at once. Each subgraph component
    /// becomes a vertex made of the component's legs and carrying its genus;
    /// vertices away from the subgraph survive unchanged, and the legs of the
    /// result are identified with the legs of the input.
    pub fn contract_subgraph(&self, edge_subset: &[usize]) -> Result<Contraction> {
        let chosen: BTreeSet<usize> = edge_subset.iter().copied().collect();
        for &e in &chosen {
            if e >= self.edges.len() {
                return Err(Error::ContractionUndefined("edge index out of range".into()));
            }
        }
        let proper = chosen.len() < self.edges.len();
        if !(self.is_connected() && proper) {
            let ok = self
                .split_components()
                .iter()
                .all(|c| !c.graph.legs().is_empty());
            if !ok {
                return Err(Error::ContractionUndefined(
                    "need a connected graph with a proper subgraph, or legs on every component"
                        .into(),
                ));
            }
        }
        let induced = self.induced_subgraph(&chosen.iter().copied().collect::<Vec<_>>());
        let comps = induced.graph.split_components();
        let removed: BTreeSet<usize> =
            chosen.iter().flat_map(|&e| [self.edges[e].0, self.edges[e].1]).collect();
        let touched: BTreeSet<usize> = induced.parent_he.iter().copied().collect();

        let mut vertices: Vec<(u32, Vec<usize>)> = Vec::new();
        for v in &self.vertices {
            if v.half_edges.iter().any(|x| touched.contains(x)) {
                continue;
            }
            vertices.push((v.genus, v.half_edges.clone()));
        }
        let surviving = vertices.len();
        let mut components = Vec::new();
        for c in &comps {
            // Legs of the component, in parent half-edge indices.
            let legs: Vec<usize> =
                c.graph.legs().iter().map(|&l| induced.parent_he[c.parent_he[l]]).collect();
            if legs.is_empty() {
                return Err(Error::ContractionUndefined(
                    "a subgraph component without legs would contract to an empty vertex".into(),
                ));
            }
            vertices.push((c.graph.genus(), legs));
            components.push(ExtractedComponent {
                graph: c.graph.clone(),
                parent_he: c.parent_he.iter().map(|&x| induced.parent_he[x]).collect(),
            });
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(_, &e)| e)
            .collect();
        let removed: Vec<usize> = removed.into_iter().collect();
        let (graph, he_map) =
            compacted(self.half_edge_count, vertices.clone(), self.legs.clone(), edges, &removed)?;
        // Locate the new vertices after the sort inside `StableGraph::new`.
        let vo = graph.vertex_of();
        let new_vertices: Vec<usize> = components
            .iter()
            .zip(vertices[surviving..].iter())
            .map(|(_, (_, legs))| vo[he_map[legs[0]].expect("component leg survives")])
            .collect();
        Ok(Contraction { graph, he_map, components, new_vertices })
    }
}

/// A connected subgraph pulled out of a parent graph.
#[derive(Debug, Clone)]
pub struct ExtractedComponent {
    pub graph: StableGraph,
    /// `parent_he[c]` is the parent half-edge behind compact index `c`.
    pub parent_he: Vec<usize>,
}

/// Result of contracting a subgraph.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub graph: StableGraph,
    /// Original half-edge to contracted-graph half-edge; `None` for the
    /// half-edges consumed by contracted edges.
    pub he_map: Vec<Option<usize>>,
    /// The contracted components, with their parent half-edge identities.
    pub components: Vec<ExtractedComponent>,
    /// Vertex of the contracted graph standing in for each component.
    pub new_vertices: Vec<usize>,
}

fn compacted(
    old_h: usize,
    vertices: Vec<(u32, Vec<usize>)>,
    legs: Vec<usize>,
    edges: Vec<(usize, usize)>,
    removed: &[usize],
) -> Result<(StableGraph, Vec<Option<usize>>)> {
    let gone: BTreeSet<usize> = removed.iter().copied().collect();
    let mut he_map: Vec<Option<usize>> = Vec::with_capacity(old_h);
    let mut next = 0;
    for x in 0..old_h {
        if gone.contains(&x) {
            he_map.push(None);
        } else {
            he_map.push(Some(next));
            next += 1;
        }
    }
    let m = |x: usize| he_map[x].expect("half-edge should survive compaction");
    let g = StableGraph::new(
        next,
        vertices.into_iter().map(|(g, hs)| (g, hs.into_iter().map(m).collect())).collect(),
        legs.into_iter().map(m).collect(),
        edges.into_iter().map(|(a, b)| (m(a), m(b))).collect(),
    )?;
    Ok((g, he_map))
}

/// Insertion data: a connected outer graph, an inner graph whose components
/// each have legs and edges, and an injection of the inner legs onto whole
/// vertices of the outer graph respecting genus.
#[derive(Debug, Clone)]
pub struct GraphTriple {
    pub outer: StableGraph,
    /// Inner leg half-edge -> outer half-edge.
    pub tau: BTreeMap<usize, usize>,
    pub inner: StableGraph,
}

impl GraphTriple {
    pub fn new(
        outer: StableGraph,
        tau: BTreeMap<usize, usize>,
        inner: StableGraph,
    ) -> Result<Self> {
        let t = GraphTriple { outer, tau, inner };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.outer.is_connected() {
            return Err(Error::InsertionInvalid("outer graph must be connected".into()));
        }
        if self.outer.edges().is_empty() {
            return Err(Error::InsertionInvalid("outer graph needs at least one edge".into()));
        }
        let legs: BTreeSet<usize> = self.inner.legs().iter().copied().collect();
        if self.tau.len() != legs.len() || !self.tau.keys().all(|k| legs.contains(k)) {
            return Err(Error::InsertionInvalid("tau must be defined exactly on the inner legs".into()));
        }
        let images: BTreeSet<usize> = self.tau.values().copied().collect();
        if images.len() != self.tau.len() {
            return Err(Error::InsertionInvalid("tau must be injective".into()));
        }
        for comp in self.inner.split_components() {
            if comp.graph.legs().is_empty() || comp.graph.edges().is_empty() {
                return Err(Error::InsertionInvalid(
                    "inner components need at least one leg and one edge".into(),
                ));
            }
            let image: BTreeSet<usize> = comp
                .graph
                .legs()
                .iter()
                .map(|&l| self.tau[&comp.parent_he[l]])
                .collect();
            let target = self
                .outer
                .vertices()
                .iter()
                .find(|v| v.half_edges.iter().copied().collect::<BTreeSet<_>>() == image);
            let Some(target) = target else {
                return Err(Error::InsertionInvalid(
                    "component legs must map onto a whole outer vertex".into(),
                ));
            };
            if target.genus != comp.graph.genus() {
                return Err(Error::InsertionInvalid("component genus must match its vertex".into()));
            }
        }
        Ok(())
    }
}

/// Result of inserting an inner graph into an outer one.
#[derive(Debug, Clone)]
pub struct Insertion {
    pub graph: StableGraph,
    /// Edge indices of the distinguished inner subgraph inside `graph`.
    pub inner_edges: Vec<usize>,
    /// Inner half-edge -> half-edge of `graph`.
    pub inner_he_map: Vec<usize>,
    /// Outer half-edge -> half-edge of `graph`; replaced half-edges resolve
    /// to the inner leg standing in for them.
    pub outer_he_map: Vec<usize>,
}

/// Replaces each vertex in the image of tau by the corresponding inner
/// component, splicing the inner legs onto the vertex's former half-edges.
pub fn insert(triple: &GraphTriple) -> Result<Insertion> {
    triple.validate()?;
    let GraphTriple { outer, tau, inner } = triple;
    let tau_inv: BTreeMap<usize, usize> = tau.iter().map(|(&l, &x)| (x, l)).collect();
    let replaced: BTreeSet<usize> = tau.values().copied().collect();

    let mut outer_new: Vec<Option<usize>> = vec![None; outer.half_edge_count()];
    let mut next = 0;
    for x in 0..outer.half_edge_count() {
        if !replaced.contains(&x) {
            outer_new[x] = Some(next);
            next += 1;
        }
    }
    let inner_base = next;
    let inner_new: Vec<usize> = (0..inner.half_edge_count()).map(|y| inner_base + y).collect();
    let resolve = |x: usize| -> usize {
        match outer_new[x] {
            Some(n) => n,
            None => inner_new[tau_inv[&x]],
        }
    };

    let mut vertices: Vec<(u32, Vec<usize>)> = Vec::new();
    for v in outer.vertices() {
        if v.half_edges.iter().any(|x| replaced.contains(x)) {
            continue;
        }
        vertices.push((v.genus, v.half_edges.iter().map(|&x| resolve(x)).collect()));
    }
    for v in inner.vertices() {
        vertices.push((v.genus, v.half_edges.iter().map(|&y| inner_new[y]).collect()));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut tagged_inner: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in outer.edges() {
        edges.push((resolve(a), resolve(b)));
    }
    for &(a, b) in inner.edges() {
        let e = (inner_new[a], inner_new[b]);
        edges.push(e);
        tagged_inner.push((e.0.min(e.1), e.0.max(e.1)));
    }
    let legs: Vec<usize> = outer.legs().iter().map(|&x| resolve(x)).collect();
    let graph = StableGraph::new(inner_base + inner.half_edge_count(), vertices, legs, edges)
        .map_err(|e| Error::InsertionInvalid(e.to_string()))?;
    let inner_edges: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| tagged_inner.contains(e))
        .map(|(i, _)| i)
        .collect();
    let outer_he_map: Vec<usize> = (0..outer.half_edge_count()).map(resolve).collect();
    Ok(Insertion { graph, inner_edges, inner_he_map: inner_new, outer_he_map })
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h={}", self.half_edge_count)?;
        for v in &self.vertices {
            let hs: Vec<String> = v.half_edges.iter().map(|x| x.to_string()).collect();
            write!(f, " | {}:[{}]", v.genus, hs.join(","))?;
        }
        let ls: Vec<String> = self.legs.iter().map(|x| x.to_string()).collect();
        write!(f, " | legs:[{}]", ls.join(","))?;
        let es: Vec<String> = self.edges.iter().map(|(a, b)| format!("({a},{b})")).collect();
        write!(f, " | edges:[{}]", es.join(","))
    }
}

impl FromStr for StableGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidGraph(format!("parse: {m}"));
        let mut parts = s.split('|').map(str::trim);
        let head = parts.next().ok_or_else(|| bad("empty record"))?;
        let h: usize = head
            .strip_prefix("h=")
            .ok_or_else(|| bad("missing h="))?
            .parse()
            .map_err(|_| bad("bad half-edge count"))?;
        let mut vertices = Vec::new();
        let mut legs = Vec::new();
        let mut edges = Vec::new();
        for part in parts {
            if let Some(body) = part.strip_prefix("legs:") {
                legs = parse_list(body).ok_or_else(|| bad("bad legs"))?;
            } else if let Some(body) = part.strip_prefix("edges:") {
                let body = body.trim().trim_start_matches('[').trim_end_matches(']');
                for pair in body.split("),").filter(|p| !p.trim().is_empty()) {
                    let pair = pair.trim().trim_start_matches('(').trim_end_matches(')');
                    let mut it = pair.split(',');
                    let a = it.next().and_then(|x| x.trim().parse().ok());
                    let b = it.next().and_then(|x| x.trim().parse().ok());
                    match (a, b) {
                        (Some(a), Some(b)) => edges.push((a, b)),
                        _ => return Err(bad("bad edge pair")),
                    }
                }
            } else {
                let (g, body) = part.split_once(':').ok_or_else(|| bad("bad vertex block"))?;
                let genus: u32 = g.trim().parse().map_err(|_| bad("bad genus"))?;
                let hs = parse_list(body).ok_or_else(|| bad("bad vertex half-edges"))?;
                vertices.push((genus, hs));
            }
        }
        StableGraph::new(h, vertices, legs, edges)
    }
}

fn parse_list(body: &str) -> Option<Vec<usize>> {
    let body = body.trim().strip_prefix('[')?.strip_suffix(']')?;
    body.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().ok())
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::StableGraph;

    /// One genus-0 vertex {0,1,2}, loop (0,1), leg 2.
    pub fn tadpole() -> StableGraph {
        StableGraph::new(3, vec![(0, vec![0, 1, 2])], vec![2], vec![(0, 1)]).unwrap()
    }

    /// One genus-0 vertex {0..3}, loop (0,1), legs 2 and 3.
    pub fn tadpole_two_legs() -> StableGraph {
        StableGraph::new(4, vec![(0, vec![0, 1, 2, 3])], vec![2, 3], vec![(0, 1)]).unwrap()
    }

    /// Two genus-0 trivalent vertices joined by three parallel edges.
    pub fn theta() -> StableGraph {
        StableGraph::new(
            6,
            vec![(0, vec![0, 1, 2]), (0, vec![3, 4, 5])],
            vec![],
            vec![(0, 3), (1, 4), (2, 5)],
        )
        .unwrap()
    }

    /// Two genus-0 trivalent vertices joined by one edge, four legs.
    pub fn bridge_four_legs() -> StableGraph {
        StableGraph::new(
            6,
            vec![(0, vec![0, 1, 2]), (0, vec![3, 4, 5])],
            vec![1, 2, 4, 5],
            vec![(0, 3)],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::error::Error;

    #[test]
    fn genus_examples() {
        let single = StableGraph::new(1, vec![(1, vec![0])], vec![0], vec![]).unwrap();
        assert_eq!(single.genus(), 1);
        assert_eq!(theta().genus(), 2);
        assert_eq!(tadpole().genus(), 1);
    }

    #[test]
    fn stability_is_enforced() {
        // Genus-zero vertex of valence two.
        assert!(StableGraph::new(2, vec![(0, vec![0, 1])], vec![], vec![(0, 1)]).is_err());
        // Empty vertex.
        assert!(StableGraph::new(0, vec![(1, vec![])], vec![], vec![]).is_err());
    }

    #[test]
    fn contract_loop_raises_genus() {
        let g = tadpole().contract_edge(0).unwrap();
        assert_eq!(g, StableGraph::new(1, vec![(1, vec![0])], vec![0], vec![]).unwrap());
    }

    #[test]
    fn contract_bridge_merges_vertices() {
        let g = bridge_four_legs().contract_edge(0).unwrap();
        assert_eq!(
            g,
            StableGraph::new(4, vec![(0, vec![0, 1, 2, 3])], vec![0, 1, 2, 3], vec![]).unwrap()
        );
    }

    #[test]
    fn contract_isolated_loop_fails() {
        let g = StableGraph::new(2, vec![(1, vec![0, 1])], vec![], vec![(0, 1)]).unwrap();
        assert!(matches!(g.contract_edge(0), Err(Error::EmptyVertex)));
    }

    #[test]
    fn contract_empty_subgraph_is_identity() {
        let g = theta();
        let c = g.contract_subgraph(&[]).unwrap();
        assert_eq!(c.graph, g);
        assert!(c.components.is_empty());
    }

    #[test]
    fn contract_tadpole_loop_in_place() {
        let c = tadpole_two_legs().contract_subgraph(&[0]).unwrap();
        assert_eq!(
            c.graph,
            StableGraph::new(2, vec![(1, vec![0, 1])], vec![0, 1], vec![]).unwrap()
        );
        assert_eq!(c.new_vertices, vec![0]);
    }

    #[test]
    fn induced_subgraph_of_theta() {
        let g = theta();
        let all = g.induced_subgraph(&[0, 1, 2]);
        assert_eq!(all.graph, g);
        let one = g.induced_subgraph(&[0]);
        assert_eq!(one.graph.edge_count(), 1);
        assert_eq!(one.graph.leg_count(), 4);
        assert_eq!(one.graph.vertices().len(), 2);
        let none = g.induced_subgraph(&[]);
        assert_eq!(none.graph.vertices().len(), 0);
    }

    #[test]
    fn text_format_round_trip() {
        for g in [tadpole(), theta(), bridge_four_legs()] {
            let s = g.to_string();
            let back: StableGraph = s.parse().unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn insert_round_trip_on_theta() {
        let g = theta();
        let c = g.contract_subgraph(&[0]).unwrap();
        let comp = &c.components[0];
        // tau: inner leg (compact index) -> outer half-edge. The contracted
        // vertex is made of the component's legs, identified with the
        // contracted graph through `he_map`.
        let tau: BTreeMap<usize, usize> = comp
            .graph
            .legs()
            .iter()
            .map(|&l| (l, c.he_map[comp.parent_he[l]].unwrap()))
            .collect();
        let triple = GraphTriple::new(c.graph.clone(), tau, comp.graph.clone()).unwrap();
        let ins = insert(&triple).unwrap();
        assert_eq!(canonical_form(&ins.graph).cert, canonical_form(&g).cert);
        assert_eq!(ins.graph.genus(), c.graph.genus());
    }
}
