//! Canonical forms, isomorphism certificates, and automorphism counts.
//!
//! Half-edges may carry per-edge colors so that subgraph-preserving
//! isomorphism reduces to plain colored isomorphism. Canonicalization refines
//! vertex classes by genus, leg count, and colored loop/adjacency data, then
//! scans the refinement-compatible vertex orderings for the lexicographically
//! minimal colored adjacency encoding.

use std::collections::BTreeMap;

use super::{GraphTriple, StableGraph};

/// Isomorphism-invariant key: the relabeled graph together with its edge
/// colors in canonical edge order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCert {
    pub graph: StableGraph,
    pub colors: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub cert: CanonicalCert,
    /// Original half-edge -> canonical half-edge.
    pub relabel: Vec<usize>,
    /// Number of compatible vertex orderings achieving the minimal encoding;
    /// this is the order of the vertex-level automorphism group.
    pub vertex_orderings: u64,
}

pub fn canonical_form(g: &StableGraph) -> Canonicalization {
    canonical_form_colored(g, &vec![0; g.edge_count()])
}

pub fn canonical_form_colored(g: &StableGraph, colors: &[u32]) -> Canonicalization {
    assert_eq!(colors.len(), g.edge_count(), "one color per edge");
    let n = g.vertices().len();
    if n == 0 {
        return Canonicalization {
            cert: CanonicalCert { graph: g.clone(), colors: Vec::new() },
            relabel: Vec::new(),
            vertex_orderings: 1,
        };
    }
    let vo = g.vertex_of();
    // Per-vertex colored loop counts and pairwise colored multiplicities.
    let mut loops: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); n];
    let mut adj: Vec<BTreeMap<usize, BTreeMap<u32, u32>>> = vec![BTreeMap::new(); n];
    for (ei, &(a, b)) in g.edges().iter().enumerate() {
        let (va, vb) = (vo[a], vo[b]);
        let c = colors[ei];
        if va == vb {
            *loops[va].entry(c).or_insert(0) += 1;
        } else {
            *adj[va].entry(vb).or_default().entry(c).or_insert(0) += 1;
            *adj[vb].entry(va).or_default().entry(c).or_insert(0) += 1;
        }
    }
    let leg_count: Vec<usize> =
        (0..n).map(|v| g.vertices()[v].half_edges.iter().filter(|&&x| g.is_leg(x)).count()).collect();

    // Refinement: iterate until the class structure stabilizes. Ids are
    // assigned by sorting signatures, so they are isomorphism-invariant.
    let mut ids: Vec<u64> = {
        let sigs: Vec<_> = (0..n)
            .map(|v| {
                (
                    g.vertices()[v].genus,
                    leg_count[v],
                    loops[v].clone(),
                    adj[v].values().flat_map(|m| m.iter().map(|(&c, &k)| (c, k))).fold(
                        BTreeMap::<u32, u32>::new(),
                        |mut acc, (c, k)| {
                            *acc.entry(c).or_insert(0) += k;
                            acc
                        },
                    ),
                )
            })
            .collect();
        assign_ids(&sigs)
    };
    loop {
        let sigs: Vec<_> = (0..n)
            .map(|v| {
                let mut nbrs: Vec<(u64, Vec<(u32, u32)>)> = adj[v]
                    .iter()
                    .map(|(&w, m)| (ids[w], m.iter().map(|(&c, &k)| (c, k)).collect()))
                    .collect();
                nbrs.sort();
                (ids[v], nbrs)
            })
            .collect();
        let next = assign_ids(&sigs);
        if next == ids {
            break;
        }
        ids = next;
    }

    // Vertices grouped into blocks by final id; orderings permute only
    // within blocks.
    let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        classes.entry(ids[v]).or_default().push(v);
    }
    let blocks: Vec<Vec<usize>> = classes.into_values().collect();
    let total: u64 = blocks.iter().map(|b| factorial(b.len() as u64)).product();
    assert!(total <= 5_000_000, "vertex ordering enumeration too large: {total}");

    let mut best: Option<Vec<Vec<(u32, u32)>>> = None;
    let mut best_order: Vec<usize> = Vec::new();
    let mut best_count: u64 = 0;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    enumerate_block_orders(&blocks, 0, &mut order, &mut |order| {
        let enc = encode(order, &adj);
        match &best {
            Some(b) if enc > *b => {}
            Some(b) if enc == *b => best_count += 1,
            _ => {
                best = Some(enc);
                best_order = order.to_vec();
                best_count = 1;
            }
        }
    });

    let relabel = canonical_relabel(g, colors, &best_order, &vo);
    let graph = g.relabel(&relabel).expect("relabeling preserves validity");
    let mut colored_edges: Vec<((usize, usize), u32)> = g
        .edges()
        .iter()
        .zip(colors)
        .map(|(&(a, b), &c)| {
            let (x, y) = (relabel[a], relabel[b]);
            ((x.min(y), x.max(y)), c)
        })
        .collect();
    colored_edges.sort();
    let colors_out = colored_edges.into_iter().map(|(_, c)| c).collect();
    Canonicalization {
        cert: CanonicalCert { graph, colors: colors_out },
        relabel,
        vertex_orderings: best_count,
    }
}

fn assign_ids<T: Ord + Clone>(sigs: &[T]) -> Vec<u64> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(s).expect("signature present") as u64)
        .collect()
}

fn enumerate_block_orders(
    blocks: &[Vec<usize>],
    bi: usize,
    order: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if bi == blocks.len() {
        f(order);
        return;
    }
    permute(&mut blocks[bi].clone(), 0, &mut |perm| {
        let len = order.len();
        order.extend_from_slice(perm);
        enumerate_block_orders(blocks, bi + 1, order, f);
        order.truncate(len);
    });
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

fn encode(
    order: &[usize],
    adj: &[BTreeMap<usize, BTreeMap<u32, u32>>],
) -> Vec<Vec<(u32, u32)>> {
    let n = order.len();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let row = adj[order[i]]
                .get(&order[j])
                .map(|m| m.iter().map(|(&c, &k)| (c, k)).collect())
                .unwrap_or_default();
            out.push(row);
        }
    }
    out
}

/// Deterministic half-edge labels given the canonical vertex order: per
/// vertex, legs first, then loops grouped by color, then non-loop halves by
/// (neighbor position, color, parallel rank). Parallel edges of one color
/// pair k-th with k-th on both sides, so the output is label-independent.
fn canonical_relabel(
    g: &StableGraph,
    colors: &[u32],
    order: &[usize],
    vo: &[usize],
) -> Vec<usize> {
    let n = order.len();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut relabel = vec![usize::MAX; g.half_edge_count()];
    let mut next = 0;
    for &v in order {
        let vpos = pos[v];
        let mut legs: Vec<usize> = Vec::new();
        // (neighbor position, color, edge index, half at v) for non-loops;
        // loops handled as whole edges.
        let mut nonloop: Vec<(usize, u32, usize, usize)> = Vec::new();
        let mut vloops: Vec<(u32, usize)> = Vec::new();
        for &x in &g.vertices()[v].half_edges {
            if g.is_leg(x) {
                legs.push(x);
            }
        }
        for (ei, &(a, b)) in g.edges().iter().enumerate() {
            let (va, vb) = (vo[a], vo[b]);
            if va == v && vb == v {
                vloops.push((colors[ei], ei));
            } else if va == v {
                nonloop.push((pos[vb], colors[ei], ei, a));
            } else if vb == v {
                nonloop.push((pos[va], colors[ei], ei, b));
            }
        }
        for x in legs {
            relabel[x] = next;
            next += 1;
        }
        vloops.sort();
        for (_, ei) in vloops {
            let (a, b) = g.edges()[ei];
            relabel[a] = next;
            relabel[b] = next + 1;
            next += 2;
        }
        nonloop.sort();
        for (_, _, _, half) in nonloop {
            relabel[half] = next;
            next += 1;
        }
        let _ = vpos;
    }
    relabel
}

pub fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// `|Aut|` of a stable graph: vertex-level automorphisms times the leg,
/// parallel-edge, and loop symmetries at each slot.
pub fn aut_count(g: &StableGraph) -> u64 {
    aut_count_colored(g, &vec![0; g.edge_count()])
}

pub fn aut_count_colored(g: &StableGraph, colors: &[u32]) -> u64 {
    let canon = canonical_form_colored(g, colors);
    let vo = g.vertex_of();
    let mut a = canon.vertex_orderings;
    for v in g.vertices() {
        let legs = v.half_edges.iter().filter(|&&x| g.is_leg(x)).count() as u64;
        a *= factorial(legs);
    }
    let mut loops: BTreeMap<(usize, u32), u64> = BTreeMap::new();
    let mut mults: BTreeMap<(usize, usize, u32), u64> = BTreeMap::new();
    for (ei, &(x, y)) in g.edges().iter().enumerate() {
        let (vx, vy) = (vo[x], vo[y]);
        if vx == vy {
            *loops.entry((vx, colors[ei])).or_insert(0) += 1;
        } else {
            *mults.entry((vx.min(vy), vx.max(vy), colors[ei])).or_insert(0) += 1;
        }
    }
    for k in loops.into_values() {
        a *= factorial(k) * (1u64 << k);
    }
    for m in mults.into_values() {
        a *= factorial(m);
    }
    a
}

/// `|Aut|` of a pair (graph, subgraph): automorphisms preserving the edge
/// subset setwise.
pub fn aut_count_pair(g: &StableGraph, edge_subset: &[usize]) -> u64 {
    aut_count_colored(g, &pair_colors(g, edge_subset))
}

pub(crate) fn pair_colors(g: &StableGraph, edge_subset: &[usize]) -> Vec<u32> {
    let mut colors = vec![0u32; g.edge_count()];
    for &e in edge_subset {
        colors[e] = 1;
    }
    colors
}

/// All colored isomorphisms `g1 -> g2` as half-edge bijections.
pub fn isomorphisms(
    g1: &StableGraph,
    colors1: &[u32],
    g2: &StableGraph,
    colors2: &[u32],
) -> Vec<Vec<usize>> {
    let h = g1.half_edge_count();
    if h != g2.half_edge_count()
        || g1.vertices().len() != g2.vertices().len()
        || g1.edge_count() != g2.edge_count()
        || g1.leg_count() != g2.leg_count()
    {
        return Vec::new();
    }
    let vo1 = g1.vertex_of();
    let vo2 = g2.vertex_of();
    let partner = |g: &StableGraph, colors: &[u32]| -> Vec<Option<(usize, u32)>> {
        let mut p = vec![None; g.half_edge_count()];
        for (ei, &(a, b)) in g.edges().iter().enumerate() {
            p[a] = Some((b, colors[ei]));
            p[b] = Some((a, colors[ei]));
        }
        p
    };
    let p1 = partner(g1, colors1);
    let p2 = partner(g2, colors2);
    let mut map: Vec<Option<usize>> = vec![None; h];
    let mut used = vec![false; h];
    let mut vmap: Vec<Option<usize>> = vec![None; g1.vertices().len()];
    let mut vused = vec![false; g2.vertices().len()];
    let mut out = Vec::new();
    search(
        0,
        &mut map,
        &mut used,
        &mut vmap,
        &mut vused,
        &Ctx { g1, g2, vo1: &vo1, vo2: &vo2, p1: &p1, p2: &p2 },
        &mut out,
    );
    out
}

struct Ctx<'a> {
    g1: &'a StableGraph,
    g2: &'a StableGraph,
    vo1: &'a [usize],
    vo2: &'a [usize],
    p1: &'a [Option<(usize, u32)>],
    p2: &'a [Option<(usize, u32)>],
}

fn search(
    x: usize,
    map: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    vmap: &mut Vec<Option<usize>>,
    vused: &mut Vec<bool>,
    ctx: &Ctx<'_>,
    out: &mut Vec<Vec<usize>>,
) {
    if x == map.len() {
        out.push(map.iter().map(|m| m.unwrap()).collect());
        return;
    }
    for y in 0..map.len() {
        if used[y] || ctx.g1.is_leg(x) != ctx.g2.is_leg(y) {
            continue;
        }
        match (ctx.p1[x], ctx.p2[y]) {
            (None, None) => {}
            (Some((px, c1)), Some((py, c2))) => {
                if c1 != c2 {
                    continue;
                }
                match map[px] {
                    Some(q) if q != py => continue,
                    Some(_) => {}
                    None => {
                        if used[py] {
                            continue;
                        }
                    }
                }
            }
            _ => continue,
        }
        let (v1, v2) = (ctx.vo1[x], ctx.vo2[y]);
        let fresh_vertex = match vmap[v1] {
            Some(w) => {
                if w != v2 {
                    continue;
                }
                false
            }
            None => {
                let (a, b) = (&ctx.g1.vertices()[v1], &ctx.g2.vertices()[v2]);
                if vused[v2] || a.genus != b.genus || a.half_edges.len() != b.half_edges.len() {
                    continue;
                }
                vmap[v1] = Some(v2);
                vused[v2] = true;
                true
            }
        };
        map[x] = Some(y);
        used[y] = true;
        search(x + 1, map, used, vmap, vused, ctx, out);
        map[x] = None;
        used[y] = false;
        if fresh_vertex {
            vmap[v1] = None;
            vused[v2] = false;
        }
    }
}

pub fn automorphisms(g: &StableGraph, colors: &[u32]) -> Vec<Vec<usize>> {
    isomorphisms(g, colors, g, colors)
}

/// `|Aut|` of an insertion triple: pairs of automorphisms of the outer and
/// inner graphs that agree across the leg attachment.
pub fn aut_count_triple(triple: &GraphTriple) -> u64 {
    let outer_auts = automorphisms(&triple.outer, &vec![0; triple.outer.edge_count()]);
    let inner_auts = automorphisms(&triple.inner, &vec![0; triple.inner.edge_count()]);
    let mut count = 0u64;
    for po in &outer_auts {
        for pi in &inner_auts {
            if triple.tau.iter().all(|(&l, &x)| po[x] == triple.tau[&pi[l]]) {
                count += 1;
            }
        }
    }
    count
}
