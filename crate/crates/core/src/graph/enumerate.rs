//! Enumeration of connected stable graphs by genus and leg count, with an
//! independent brute-force generator used as a test oracle, plus the
//! orbit-count identity relating pair and triple automorphism counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::canon::{
    aut_count, aut_count_triple, automorphisms, canonical_form, canonical_form_colored,
    pair_colors,
};
use super::{insert, CanonicalCert, Contraction, GraphTriple, StableGraph};
use crate::error::Result;

/// Memoized enumeration of connected stable graphs keyed by (genus, legs).
/// Graphs are returned in canonical labeling, sorted, including the
/// edge-free single-vertex graph when it is stable.
#[derive(Default)]
pub struct GraphCatalog {
    memo: Mutex<HashMap<(u32, u32), Arc<Vec<StableGraph>>>>,
}

impl GraphCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn connected(&self, genus: u32, legs: u32) -> Arc<Vec<StableGraph>> {
        if let Some(v) = self.memo.lock().expect("catalog lock").get(&(genus, legs)) {
            return Arc::clone(v);
        }
        let v = Arc::new(enumerate_connected(genus, legs));
        self.memo.lock().expect("catalog lock").insert((genus, legs), Arc::clone(&v));
        v
    }
}

/// All isomorphism classes of connected stable graphs of the given genus and
/// leg count. The edge count is bounded by `5*genus + legs - 3`.
pub fn enumerate_connected(genus: u32, legs: u32) -> Vec<StableGraph> {
    let mut seen: BTreeSet<CanonicalCert> = BTreeSet::new();
    let mut out: Vec<StableGraph> = Vec::new();
    let emax = 5 * genus as i64 + legs as i64 - 3;
    if emax < 0 {
        return out;
    }
    for e in 0..=(emax as usize) {
        for b1 in 0..=genus.min(e as u32) {
            let v = e + 1 - b1 as usize;
            let gs = genus - b1;
            for types in vertex_types(v, gs, legs as usize, 2 * e) {
                let degrees: Vec<usize> = types.iter().map(|t| t.2).collect();
                degree_matrices(&degrees, &mut |loops, mult| {
                    if let Some(g) = build_graph(&types, loops, mult) {
                        if g.is_connected() {
                            debug_assert_eq!(g.genus(), genus);
                            let cert = canonical_form(&g).cert;
                            if seen.insert(cert.clone()) {
                                out.push(cert.graph);
                            }
                        }
                    }
                });
            }
        }
    }
    out.sort();
    out
}

/// Non-increasing sequences of vertex types (genus, legs, degree) satisfying
/// the totals and stability.
fn vertex_types(v: usize, gs: u32, legs: usize, deg: usize) -> Vec<Vec<(u32, usize, usize)>> {
    let mut out = Vec::new();
    let mut acc: Vec<(u32, usize, usize)> = Vec::new();
    fn rec(
        v: usize,
        gs: u32,
        legs: usize,
        deg: usize,
        max: (u32, usize, usize),
        multi: bool,
        acc: &mut Vec<(u32, usize, usize)>,
        out: &mut Vec<Vec<(u32, usize, usize)>>,
    ) {
        if v == 0 {
            if gs == 0 && legs == 0 && deg == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for g in (0..=gs.min(max.0)).rev() {
            let lmax = if g == max.0 { max.1 } else { legs };
            for l in (0..=legs.min(lmax)).rev() {
                let dmax = if g == max.0 && l == max.1 { max.2 } else { deg };
                for d in (0..=deg.min(dmax)).rev() {
                    if multi && d == 0 {
                        continue;
                    }
                    if d + l == 0 || (g == 0 && d + l < 3) {
                        continue;
                    }
                    acc.push((g, l, d));
                    rec(v - 1, gs - g, legs - l, deg - d, (g, l, d), multi, acc, out);
                    acc.pop();
                }
            }
        }
    }
    rec(v, gs, legs, deg, (gs, legs, deg), v > 1, &mut acc, &mut out);
    out
}

/// Loop counts and upper-triangular multiplicities realizing a degree
/// sequence.
fn degree_matrices(degrees: &[usize], f: &mut impl FnMut(&[usize], &[Vec<usize>])) {
    let n = degrees.len();
    let mut rem: Vec<usize> = degrees.to_vec();
    let mut loops = vec![0usize; n];
    let mut mult: Vec<Vec<usize>> = (0..n).map(|i| vec![0; n - i - 1]).collect();
    fn rec(
        i: usize,
        rem: &mut Vec<usize>,
        loops: &mut Vec<usize>,
        mult: &mut Vec<Vec<usize>>,
        f: &mut impl FnMut(&[usize], &[Vec<usize>]),
    ) {
        let n = rem.len();
        if i == n {
            f(loops, mult);
            return;
        }
        for l in 0..=(rem[i] / 2) {
            loops[i] = l;
            let after_loops = rem[i] - 2 * l;
            fn fill(
                i: usize,
                j: usize,
                left: usize,
                rem: &mut Vec<usize>,
                loops: &mut Vec<usize>,
                mult: &mut Vec<Vec<usize>>,
                f: &mut impl FnMut(&[usize], &[Vec<usize>]),
            ) {
                let n = rem.len();
                if j == n {
                    if left == 0 {
                        rem[i] = 0;
                        rec(i + 1, rem, loops, mult, f);
                    }
                    return;
                }
                for m in 0..=left.min(rem[j]) {
                    mult[i][j - i - 1] = m;
                    rem[j] -= m;
                    fill(i, j + 1, left - m, rem, loops, mult, f);
                    rem[j] += m;
                    mult[i][j - i - 1] = 0;
                }
            }
            let saved = rem[i];
            fill(i, i + 1, after_loops, rem, loops, mult, f);
            rem[i] = saved;
            loops[i] = 0;
        }
    }
    rec(0, &mut rem, &mut loops, &mut mult, f);
}

fn build_graph(
    types: &[(u32, usize, usize)],
    loops: &[usize],
    mult: &[Vec<usize>],
) -> Option<StableGraph> {
    let n = types.len();
    let mut start = vec![0usize; n + 1];
    for (i, &(_, l, d)) in types.iter().enumerate() {
        start[i + 1] = start[i] + l + d;
    }
    let h = start[n];
    let mut vertices: Vec<(u32, Vec<usize>)> = Vec::with_capacity(n);
    let mut legs: Vec<usize> = Vec::new();
    for (i, &(g, l, _)) in types.iter().enumerate() {
        vertices.push((g, (start[i]..start[i + 1]).collect()));
        legs.extend(start[i]..start[i] + l);
    }
    // Next free edge slot per vertex, after the legs.
    let mut free: Vec<usize> = types.iter().enumerate().map(|(i, &(_, l, _))| start[i] + l).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for _ in 0..loops[i] {
            edges.push((free[i], free[i] + 1));
            free[i] += 2;
        }
        for j in (i + 1)..n {
            for _ in 0..mult[i][j - i - 1] {
                edges.push((free[i], free[j]));
                free[i] += 1;
                free[j] += 1;
            }
        }
    }
    StableGraph::new(h, vertices, legs, edges).ok()
}

/// Nonempty edge subsets of a graph; excludes the full edge set when
/// `proper` is set.
pub fn enumerate_subgraphs(g: &StableGraph, proper: bool) -> Vec<Vec<usize>> {
    let e = g.edge_count();
    assert!(e < 32, "subgraph enumeration limited to small graphs");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << e) {
        if proper && mask == (1u32 << e) - 1 {
            continue;
        }
        out.push((0..e).filter(|i| mask >> i & 1 == 1).collect());
    }
    out
}

/// Verifies the orbit-count identity for one pair (graph, subgraph).
///
/// Contracting the subgraph yields a triple (contracted graph, attachment,
/// components). The identity says: the number of ways to pick a vertex
/// subset of the contracted graph, assign the component classes to those
/// vertices, and choose leg bijections so that the assembled triple is
/// isomorphic to the reference one, equals
/// `|Aut(contracted)| * prod |Aut(component)| / |Aut(triple)|`.
/// Returns the two counts.
pub fn orbit_count_check(g: &StableGraph, subgraph: &[usize]) -> Result<(u64, u64)> {
    let ref_cert = canonical_form_colored(g, &pair_colors(g, subgraph)).cert;
    let c = g.contract_subgraph(subgraph)?;
    let lhs = count_assemblies(&c, &ref_cert);
    let comp_aut: u64 = c.components.iter().map(|comp| aut_count(&comp.graph)).product();
    let triple = reassemble_triple(&c)?;
    let rhs_num = aut_count(&c.graph) * comp_aut;
    let rhs_den = aut_count_triple(&triple);
    assert_eq!(rhs_num % rhs_den, 0, "triple automorphisms divide the product");
    Ok((lhs, rhs_num / rhs_den))
}

/// Rebuilds the nested pair produced by a contraction: the disjoint union
/// of the contracted components becomes the inner graph, attached along its
/// legs to the contracted graph's replacement half-edges.
pub fn reassemble_triple(c: &Contraction) -> Result<GraphTriple> {
    let mut inner_parts: Vec<(u32, Vec<usize>)> = Vec::new();
    let mut tau: BTreeMap<usize, usize> = BTreeMap::new();
    let mut offset = 0usize;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut inner_legs: Vec<usize> = Vec::new();
    for comp in &c.components {
        for v in comp.graph.vertices() {
            inner_parts.push((v.genus, v.half_edges.iter().map(|&x| x + offset).collect()));
        }
        for &(a, b) in comp.graph.edges() {
            edges.push((a + offset, b + offset));
        }
        for &l in comp.graph.legs() {
            inner_legs.push(l + offset);
            tau.insert(l + offset, c.he_map[comp.parent_he[l]].expect("legs survive"));
        }
        offset += comp.graph.half_edge_count();
    }
    let inner = StableGraph::new(offset, inner_parts, inner_legs, edges)?;
    GraphTriple::new(c.graph.clone(), tau, inner)
}

/// Brute-force count of the assemblies (vertex subset, class assignment,
/// leg bijections) on the contracted graph whose resulting triple is
/// isomorphic to the reference pair certificate. Bijections are enumerated
/// up to the leg action of the component automorphisms, weighting each
/// representative by the orbit size.
fn count_assemblies(c: &Contraction, ref_cert: &CanonicalCert) -> u64 {
    let outer = &c.graph;
    let n = outer.vertices().len();
    let k = c.components.len();
    let reps: Vec<StableGraph> =
        c.components.iter().map(|comp| canonical_form(&comp.graph).cert.graph).collect();

    // Distinct (vertex subset, class assignment) pairs.
    let mut assignments: BTreeSet<BTreeMap<usize, StableGraph>> = BTreeSet::new();
    let mut used = vec![false; n];
    fn pick(
        i: usize,
        reps: &[StableGraph],
        used: &mut Vec<bool>,
        acc: &mut BTreeMap<usize, StableGraph>,
        out: &mut BTreeSet<BTreeMap<usize, StableGraph>>,
    ) {
        if i == reps.len() {
            out.insert(acc.clone());
            return;
        }
        for v in 0..used.len() {
            if used[v] || acc.contains_key(&v) {
                continue;
            }
            used[v] = true;
            acc.insert(v, reps[i].clone());
            pick(i + 1, reps, used, acc, out);
            acc.remove(&v);
            used[v] = false;
        }
    }
    pick(0, &reps, &mut used, &mut BTreeMap::new(), &mut assignments);

    let mut lhs = 0u64;
    for assign in &assignments {
        let compatible = assign.iter().all(|(&v, rep)| {
            let vert = &outer.vertices()[v];
            vert.genus == rep.genus() && vert.half_edges.len() == rep.leg_count()
        });
        if !compatible {
            continue;
        }
        // Per vertex: coset representatives of leg bijections modulo the
        // component's automorphism action on its legs, and the orbit size.
        let mut per_vertex: Vec<(usize, &StableGraph, Vec<Vec<usize>>)> = Vec::new();
        let mut factor = 1u64;
        for (&v, rep) in assign {
            let legs = rep.legs().to_vec();
            let halves = outer.vertices()[v].half_edges.clone();
            let pos: BTreeMap<usize, usize> =
                legs.iter().enumerate().map(|(i, &l)| (l, i)).collect();
            let mut leg_actions: BTreeSet<Vec<usize>> = BTreeSet::new();
            for a in automorphisms(rep, &vec![0; rep.edge_count()]) {
                leg_actions.insert(legs.iter().map(|&l| pos[&a[l]]).collect());
            }
            factor *= leg_actions.len() as u64;
            let mut sigmas: Vec<Vec<usize>> = Vec::new();
            let mut order: Vec<usize> = halves.clone();
            permute_all(&mut order, 0, &mut |sigma| {
                let minimal = leg_actions
                    .iter()
                    .all(|p| p.iter().map(|&i| sigma[i]).ge(sigma.iter().copied()));
                if minimal {
                    sigmas.push(sigma.to_vec());
                }
            });
            per_vertex.push((v, rep, sigmas));
        }
        // Every combination of coset representatives.
        let mut choice = vec![0usize; k];
        loop {
            let mut parts: Vec<(u32, Vec<usize>)> = Vec::new();
            let mut edges: Vec<(usize, usize)> = Vec::new();
            let mut legs: Vec<usize> = Vec::new();
            let mut tau: BTreeMap<usize, usize> = BTreeMap::new();
            let mut offset = 0usize;
            for (ci, (_, rep, sigmas)) in per_vertex.iter().enumerate() {
                let sigma = &sigmas[choice[ci]];
                for vert in rep.vertices() {
                    parts.push((vert.genus, vert.half_edges.iter().map(|&x| x + offset).collect()));
                }
                for &(a, b) in rep.edges() {
                    edges.push((a + offset, b + offset));
                }
                for (i, &l) in rep.legs().iter().enumerate() {
                    legs.push(l + offset);
                    tau.insert(l + offset, sigma[i]);
                }
                offset += rep.half_edge_count();
            }
            let inner = StableGraph::new(offset, parts, legs, edges)
                .expect("disjoint union of valid graphs is valid");
            let triple = GraphTriple::new(outer.clone(), tau, inner)
                .expect("assembled attachment satisfies the insertion conditions");
            let ins = insert(&triple).expect("validated triple inserts");
            let cert =
                canonical_form_colored(&ins.graph, &pair_colors(&ins.graph, &ins.inner_edges)).cert;
            if cert == *ref_cert {
                lhs += factor;
            }
            // Advance the mixed-radix choice counter.
            let mut i = 0;
            while i < k {
                choice[i] += 1;
                if choice[i] < per_vertex[i].2.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    lhs
}

fn permute_all(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_all(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Smallest index set containing `base` and closed under taking vertex
/// types of the graphs at its indices.
pub fn index_closure(catalog: &GraphCatalog, base: &BTreeSet<(u32, u32)>) -> BTreeSet<(u32, u32)> {
    let mut set = base.clone();
    for _round in 0..64 {
        let mut next = set.clone();
        for &(i, j) in &set {
            for g in catalog.connected(i, j).iter() {
                for v in g.vertices() {
                    next.insert((v.genus, v.half_edges.len() as u32));
                }
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
    panic!("interaction index closure did not stabilize");
}

/// Brute-force oracle: every connected stable graph class with at most
/// `max_h` half-edges, built from raw set partitions and matchings.
pub fn brute_force_connected(genus: u32, legs: u32, max_h: usize) -> BTreeSet<CanonicalCert> {
    let mut labeled: BTreeSet<StableGraph> = BTreeSet::new();
    for h in 1..=max_h {
        let involutions = involutions_with_fixed(h, legs as usize);
        let mut partitions = Vec::new();
        set_partitions(h, &mut partitions);
        for blocks in &partitions {
            for (fixed, pairs) in &involutions {
                let v = blocks.len();
                let e = pairs.len();
                if !connected_blocks(blocks, pairs, h) {
                    continue;
                }
                let b1 = e as i64 - v as i64 + 1;
                if b1 < 0 || b1 as u32 > genus {
                    continue;
                }
                let gs = genus - b1 as u32;
                compositions(gs, v, &mut |gv| {
                    let verts: Vec<(u32, Vec<usize>)> =
                        blocks.iter().zip(gv).map(|(b, &g)| (g, b.clone())).collect();
                    if let Ok(g) = StableGraph::new(h, verts, fixed.clone(), pairs.clone()) {
                        debug_assert!(g.is_connected() && g.genus() == genus);
                        labeled.insert(g);
                    }
                });
            }
        }
    }
    labeled.iter().map(|g| canonical_form(g).cert).collect()
}

fn set_partitions(h: usize, out: &mut Vec<Vec<Vec<usize>>>) {
    fn rec(x: usize, h: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if x == h {
            out.push(blocks.clone());
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(x);
            rec(x + 1, h, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![x]);
        rec(x + 1, h, blocks, out);
        blocks.pop();
    }
    rec(0, h, &mut Vec::new(), out);
}

/// Involutions on `0..h` with exactly `fixed_count` fixed points, as
/// (fixed points, transposition pairs).
fn involutions_with_fixed(h: usize, fixed_count: usize) -> Vec<(Vec<usize>, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    fn rec(
        h: usize,
        taken: &mut Vec<bool>,
        fixed: &mut Vec<usize>,
        pairs: &mut Vec<(usize, usize)>,
        want_fixed: usize,
        out: &mut Vec<(Vec<usize>, Vec<(usize, usize)>)>,
    ) {
        let Some(x) = (0..h).find(|&x| !taken[x]) else {
            if fixed.len() == want_fixed {
                out.push((fixed.clone(), pairs.clone()));
            }
            return;
        };
        taken[x] = true;
        if fixed.len() < want_fixed {
            fixed.push(x);
            rec(h, taken, fixed, pairs, want_fixed, out);
            fixed.pop();
        }
        for y in (x + 1)..h {
            if taken[y] {
                continue;
            }
            taken[y] = true;
            pairs.push((x, y));
            rec(h, taken, fixed, pairs, want_fixed, out);
            pairs.pop();
            taken[y] = false;
        }
        taken[x] = false;
    }
    rec(h, &mut vec![false; h], &mut Vec::new(), &mut Vec::new(), fixed_count, &mut out);
    out
}

fn connected_blocks(blocks: &[Vec<usize>], pairs: &[(usize, usize)], h: usize) -> bool {
    let mut block_of = vec![0usize; h];
    for (i, b) in blocks.iter().enumerate() {
        for &x in b {
            block_of[x] = i;
        }
    }
    let n = blocks.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, block_of[a]), find(&mut parent, block_of[b]));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    (0..n).all(|v| find(&mut parent, v) == root)
}

fn compositions(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(total: u32, parts: usize, acc: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if parts == 1 {
            acc.push(total);
            f(acc);
            acc.pop();
            return;
        }
        for g in 0..=total {
            acc.push(g);
            rec(total - g, parts - 1, acc, f);
            acc.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(total, parts, &mut Vec::new(), f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_class_counts() {
        assert_eq!(enumerate_connected(0, 3).len(), 1);
        assert_eq!(enumerate_connected(0, 4).len(), 2);
        assert_eq!(enumerate_connected(1, 0).len(), 0);
        assert_eq!(enumerate_connected(1, 1).len(), 2);
    }

    #[test]
    fn enumeration_matches_brute_force_small() {
        for (genus, legs, max_h) in [(0, 3, 6), (0, 4, 7), (0, 5, 7), (1, 1, 6), (1, 2, 7)] {
            let brute = brute_force_connected(genus, legs, max_h);
            let fast: BTreeSet<_> = enumerate_connected(genus, legs)
                .iter()
                .filter(|g| g.half_edge_count() <= max_h)
                .map(|g| canonical_form(g).cert)
                .collect();
            assert_eq!(fast, brute, "genus {genus} legs {legs}");
        }
    }

    #[test]
    fn catalog_memoizes() {
        let cat = GraphCatalog::new();
        let a = cat.connected(1, 1);
        let b = cat.connected(1, 1);
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn subgraph_enumeration_counts() {
        let g = crate::graph::fixtures::theta();
        assert_eq!(enumerate_subgraphs(&g, true).len(), 6);
        assert_eq!(enumerate_subgraphs(&g, false).len(), 7);
    }

    #[test]
    fn orbit_counts_agree_on_theta_subgraphs() {
        let g = crate::graph::fixtures::theta();
        for sub in enumerate_subgraphs(&g, true) {
            let (lhs, rhs) = orbit_count_check(&g, &sub).unwrap();
            assert_eq!(lhs, rhs, "subgraph {sub:?}");
        }
    }

    #[test]
    fn index_closure_contains_rectangle_and_stabilizes() {
        let cat = GraphCatalog::new();
        let base: BTreeSet<(u32, u32)> =
            [(0, 3), (1, 0), (1, 1), (1, 2), (1, 3)].into_iter().collect();
        let set = index_closure(&cat, &base);
        assert!(set.contains(&(0, 3)));
        assert!(set.contains(&(1, 1)));
        assert!(!set.contains(&(0, 2)));
        // Closed: recomputing vertex types adds nothing.
        for &(i, j) in &set {
            for g in cat.connected(i, j).iter() {
                for v in g.vertices() {
                    assert!(set.contains(&(v.genus, v.half_edges.len() as u32)));
                }
            }
        }
    }
}
