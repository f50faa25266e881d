//! Exhaustive enumeration of small spines and of the model-flow specs built from them.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fatgraph::{canonical_code, canonical_spine, BoundaryColoring, Color, Dart, FatGraph, Spine};
use crate::fixtures::standard_spec;
use crate::model::{propagate_orientations, ModelFlowSpec, ModelPiece, OrientationSeed, TorusRef};
use crate::sign::Sign;

pub const MAX_SPINE_EDGES: usize = 6;

/// Every valid colored spine with at most `max_edges` edges, once per
/// orientation-preserving isomorphism class, in canonical form, ordered by
/// edge count and then canonical code.
pub fn enumerate_spines(max_edges: usize) -> Result<Vec<Spine>> {
    if !(1..=MAX_SPINE_EDGES).contains(&max_edges) {
        return Err(Error::Capacity(format!("spine census supports 1..={MAX_SPINE_EDGES} edges, got {max_edges}")));
    }
    let mut found: BTreeMap<(usize, Vec<u32>), Spine> = BTreeMap::new();
    for edges in 1..=max_edges {
        let n = 2 * edges;
        for valences in even_partitions(n) {
            let rotation = standard_rotation(&valences);
            for_each_matching(n, &mut |pairs| {
                let Ok(graph) = FatGraph::new(rotation.clone(), pairs.to_vec()) else {
                    return;
                };
                for colors in dual_colorings(&graph) {
                    let spine = Spine::new(graph.clone(), colors);
                    if !spine.validate().map(|r| r.passed()).unwrap_or(false) {
                        continue;
                    }
                    let key = (edges, canonical_code(&spine).0);
                    found.entry(key).or_insert_with(|| canonical_spine(&spine));
                }
            });
        }
    }
    Ok(found.into_values().collect())
}

/// Non-increasing partitions of `n` into even parts.
fn even_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        let mut part = max.min(rest) / 2 * 2;
        while part >= 2 {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
            part -= 2;
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Darts `1..=n` split into consecutive rotation cycles of the given lengths.
fn standard_rotation(valences: &[usize]) -> Vec<Vec<Dart>> {
    let mut next = 1;
    valences
        .iter()
        .map(|&k| {
            let cycle = (next..next + k as Dart).collect();
            next += k as Dart;
            cycle
        })
        .collect()
}

/// Calls `f` on every perfect matching of darts `1..=n`.
fn for_each_matching(n: usize, f: &mut dyn FnMut(&[[Dart; 2]])) {
    fn go(free: &mut Vec<Dart>, acc: &mut Vec<[Dart; 2]>, f: &mut dyn FnMut(&[[Dart; 2]])) {
        if free.is_empty() {
            f(acc);
            return;
        }
        let a = free.remove(0);
        for k in 0..free.len() {
            let b = free.remove(k);
            acc.push([a, b]);
            go(free, acc, f);
            acc.pop();
            free.insert(k, b);
        }
        free.insert(0, a);
    }
    go(&mut (1..=n as Dart).collect(), &mut Vec::new(), f);
}

/// The (zero or two) colorings in which the two sides of every edge differ.
fn dual_colorings(g: &FatGraph) -> Vec<BoundaryColoring> {
    let b = g.boundary_count();
    let mut adj = vec![Vec::new(); b];
    for [x, y] in g.edge_list() {
        let (fx, fy) = (g.boundary_of(x), g.boundary_of(y));
        if fx == fy {
            return Vec::new();
        }
        adj[fx].push(fy);
        adj[fy].push(fx);
    }
    let mut color = vec![None; b];
    color[0] = Some(Color::Exit);
    let mut stack = vec![0];
    while let Some(f) = stack.pop() {
        let c = color[f].unwrap();
        for &h in &adj[f] {
            match color[h] {
                None => {
                    color[h] = Some(c.opposite());
                    stack.push(h);
                }
                Some(ch) if ch == c => return Vec::new(),
                Some(_) => {}
            }
        }
    }
    let first: Vec<Color> = color.into_iter().map(|c| c.expect("dual of a connected graph is connected")).collect();
    let second = first.iter().map(|c| c.opposite()).collect();
    vec![BoundaryColoring::from_vec(first), BoundaryColoring::from_vec(second)]
}

/// Bounds of the spec census.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusOptions {
    pub max_edges: usize,
    pub max_pieces: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { max_edges: 4, max_pieces: 2 }
    }
}

/// Every spec with `1..=max_pieces` pieces (ids `p0`, `p1`, ...) whose spines
/// come from [`enumerate_spines`], have negative Euler characteristic (so the
/// piece is not `T² × I`) and admit an orientation, with every
/// exit-to-entrance pairing that glues all pieces into one connected manifold.
///
/// Pieces are a non-decreasing sequence of census spines. Every spec uses the
/// standard bases, the swap matrix on every pair, no surgery and seed `(0, +)`.
pub fn spec_census(opts: CensusOptions) -> Result<Vec<ModelFlowSpec>> {
    if opts.max_pieces == 0 || opts.max_pieces > 2 {
        return Err(Error::Capacity(format!("spec census supports 1 or 2 pieces, got {}", opts.max_pieces)));
    }
    let spines: Vec<Spine> = enumerate_spines(opts.max_edges)?
        .into_iter()
        .filter(|s| s.graph.vertex_count() < s.graph.edge_count())
        .filter(|s| {
            let p = ModelPiece::unsurgered("probe", s.clone());
            propagate_orientations(&p, OrientationSeed::new(0, Sign::Plus)).is_ok()
        })
        .collect();
    let mut out = Vec::new();
    for s in &spines {
        push_gluings(&[s], &mut out);
    }
    if opts.max_pieces == 2 {
        for i in 0..spines.len() {
            for j in i..spines.len() {
                push_gluings(&[&spines[i], &spines[j]], &mut out);
            }
        }
    }
    Ok(out)
}

fn push_gluings(spines: &[&Spine], out: &mut Vec<ModelFlowSpec>) {
    let pieces: Vec<ModelPiece> =
        spines.iter().enumerate().map(|(k, s)| ModelPiece::unsurgered(format!("p{k}"), (*s).clone())).collect();
    let tori = |color| -> Vec<TorusRef> {
        pieces
            .iter()
            .flat_map(|p| p.spine.cycles_with(color).into_iter().map(|k| TorusRef::new(p.id.clone(), k)))
            .collect()
    };
    let (exits, entrances) = (tori(Color::Exit), tori(Color::Entrance));
    if exits.len() != entrances.len() {
        return;
    }
    for perm in permutations(entrances.len()) {
        let pairing: Vec<(TorusRef, TorusRef)> =
            exits.iter().cloned().zip(perm.iter().map(|&k| entrances[k].clone())).collect();
        if glues_connected(pieces.len(), &pairing) {
            out.push(standard_spec(pieces.clone(), pairing));
        }
    }
}

fn glues_connected(n: usize, pairing: &[(TorusRef, TorusRef)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut seen = BTreeSet::from(["p0".to_string()]);
    loop {
        let before = seen.len();
        for (x, y) in pairing {
            if seen.contains(&x.piece) || seen.contains(&y.piece) {
                seen.insert(x.piece.clone());
                seen.insert(y.piece.clone());
            }
        }
        if seen.len() == before {
            return seen.len() == n;
        }
    }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatgraph::fatgraph_isomorphic;
    use crate::fixtures;

    #[test]
    fn partitions_and_matchings() {
        assert_eq!(even_partitions(6), vec![vec![6], vec![4, 2], vec![2, 2, 2]]);
        let mut count = 0;
        for_each_matching(6, &mut |_| count += 1);
        assert_eq!(count, 15);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn no_one_edge_spine() {
        assert!(enumerate_spines(1).unwrap().is_empty());
        assert!(enumerate_spines(0).is_err());
        assert!(enumerate_spines(7).is_err());
    }

    #[test]
    fn banana_in_census() {
        let spines = enumerate_spines(4).unwrap();
        let banana = fixtures::banana_spine();
        assert_eq!(spines.iter().filter(|s| fatgraph_isomorphic(&banana, s, false).is_some()).count(), 1);
        for s in &spines {
            assert!(s.validate().unwrap().passed());
        }
    }
}
