//! Brute-force oracles that recompute everything from raw permutation data.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use paflow::{Color, Dart, GluingMatrix, ModelFlowSpec};

/// Orbits of `d ↦ rot(inv(d))`, each starting at its least dart, ordered by that dart.
pub fn faces(rot: &HashMap<Dart, Dart>, inv: &HashMap<Dart, Dart>) -> Vec<Vec<Dart>> {
    let mut darts: Vec<Dart> = rot.keys().copied().collect();
    darts.sort_unstable();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in darts {
        if seen.contains(&d) {
            continue;
        }
        let mut orbit = vec![d];
        seen.insert(d);
        let mut x = rot[&inv[&d]];
        while x != d {
            orbit.push(x);
            seen.insert(x);
            x = rot[&inv[&x]];
        }
        out.push(orbit);
    }
    out
}

pub fn rotation_map(cycles: &[Vec<Dart>]) -> HashMap<Dart, Dart> {
    let mut m = HashMap::new();
    for c in cycles {
        for (k, &d) in c.iter().enumerate() {
            m.insert(d, c[(k + 1) % c.len()]);
        }
    }
    m
}

pub fn involution_map(edges: &[[Dart; 2]]) -> HashMap<Dart, Dart> {
    edges.iter().flat_map(|&[a, b]| [(a, b), (b, a)]).collect()
}

fn connected(cycles: &[Vec<Dart>], edges: &[[Dart; 2]]) -> bool {
    let vertex_of: HashMap<Dart, usize> =
        cycles.iter().enumerate().flat_map(|(v, c)| c.iter().map(move |&d| (d, v))).collect();
    let mut parent: Vec<usize> = (0..cycles.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for [a, b] in edges {
        let (x, y) = (find(&mut parent, vertex_of[a]), find(&mut parent, vertex_of[b]));
        parent[x] = y;
    }
    let roots: BTreeSet<usize> = (0..cycles.len()).map(|v| find(&mut parent, v)).collect();
    roots.len() == 1
}

/// Verdict of the direct checker: conditions (connected, even valence,
/// sides differ, even boundary) and the overall result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpineVerdict {
    pub conditions: [bool; 4],
    pub genus_ok: bool,
}

impl SpineVerdict {
    pub fn accepted(&self) -> bool {
        self.conditions.iter().all(|&c| c) && self.genus_ok
    }
}

pub fn check_spine(cycles: &[Vec<Dart>], edges: &[[Dart; 2]], colors: &[Color]) -> SpineVerdict {
    let rot = rotation_map(cycles);
    let inv = involution_map(edges);
    let fs = faces(&rot, &inv);
    let face_of: HashMap<Dart, usize> =
        fs.iter().enumerate().flat_map(|(k, f)| f.iter().map(move |&d| (d, k))).collect();
    let c1 = connected(cycles, edges);
    let c2 = cycles.iter().all(|c| c.len() % 2 == 0);
    let c3 = rot.keys().all(|d| colors[face_of[d]] != colors[face_of[&inv[d]]]);
    let c4 = fs.iter().all(|f| f.len() % 2 == 0);
    let chi = cycles.len() as i64 - edges.len() as i64;
    let two_g = 2 - chi - fs.len() as i64;
    SpineVerdict { conditions: [c1, c2, c3, c4], genus_ok: c1 && two_g >= 0 && two_g % 2 == 0 }
}

/// Independent reconstruction of the quotient graph and its augmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedGraph {
    pub tori: usize,
    /// `(from, to, sign)` per fat-graph edge, pieces in spec order.
    pub edges: Vec<(usize, usize, i64)>,
    /// orbit name ↦ tori reachable from the orbit / tori reaching the orbit.
    pub orbit_out: BTreeMap<String, BTreeSet<usize>>,
    pub orbit_in: BTreeMap<String, BTreeSet<usize>>,
}

pub fn augmented_graph(s: &ModelFlowSpec) -> AugmentedGraph {
    let mut torus_of = BTreeMap::new();
    for (i, (x, n)) in s.pairing.iter().enumerate() {
        torus_of.insert((x.piece.clone(), x.cycle), i);
        torus_of.insert((n.piece.clone(), n.cycle), i);
    }
    let mut edges = Vec::new();
    let mut orbit_out = BTreeMap::new();
    let mut orbit_in = BTreeMap::new();
    for p in &s.pieces {
        let cycles = p.spine.graph.rotation_cycles();
        let raw_edges = p.spine.graph.edge_list();
        let rot = rotation_map(&cycles);
        let inv = involution_map(&raw_edges);
        let fs = faces(&rot, &inv);
        let face_of: HashMap<Dart, usize> =
            fs.iter().enumerate().flat_map(|(k, f)| f.iter().map(move |&d| (d, k))).collect();
        let vertex_of: HashMap<Dart, usize> =
            cycles.iter().enumerate().flat_map(|(v, c)| c.iter().map(move |&d| (d, v))).collect();
        let color = |k: usize| p.spine.colors.0[&k];
        // sign: +1 at the seed vertex, alternating along edges
        let seed = s.orientation_seed[&p.id];
        let mut sign = vec![0i64; cycles.len()];
        sign[seed.vertex] = seed.sign.to_i64();
        for _ in 0..cycles.len() {
            for &[a, b] in &raw_edges {
                let (va, vb) = (vertex_of[&a], vertex_of[&b]);
                if sign[va] != 0 {
                    sign[vb] = -sign[va];
                } else if sign[vb] != 0 {
                    sign[va] = -sign[vb];
                }
            }
        }
        let torus = |k: usize| torus_of[&(p.id.clone(), k)];
        for &[a, b] in &raw_edges {
            let (ent, ex) = if color(face_of[&a]) == Color::Entrance { (a, b) } else { (b, a) };
            edges.push((torus(face_of[&ent]), torus(face_of[&ex]), sign[vertex_of[&ent]]));
        }
        for v in 0..cycles.len() {
            let name = format!("{}.v{}", p.id, v);
            orbit_out.insert(name.clone(), BTreeSet::new());
            orbit_in.insert(name, BTreeSet::new());
        }
        for (k, f) in fs.iter().enumerate() {
            for d in f {
                let name = format!("{}.v{}", p.id, vertex_of[d]);
                match color(k) {
                    Color::Entrance => orbit_in.get_mut(&name).unwrap().insert(torus(k)),
                    Color::Exit => orbit_out.get_mut(&name).unwrap().insert(torus(k)),
                };
            }
        }
    }
    AugmentedGraph { tori: s.pairing.len(), edges, orbit_out, orbit_in }
}

/// Reachability closure (Floyd–Warshall) of the torus graph.
pub fn closure(tori: usize, edges: &[(usize, usize, i64)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; tori]; tori];
    for &(a, b, _) in edges {
        r[a][b] = true;
    }
    for k in 0..tori {
        for i in 0..tori {
            for j in 0..tori {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

pub fn strongly_connected_by_closure(tori: usize, edges: &[(usize, usize, i64)]) -> bool {
    let r = closure(tori, edges);
    (0..tori).all(|i| (0..tori).all(|j| i == j || r[i][j]))
}

fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of closed walks of length `n` up to rotation, by Burnside:
/// `(1/n) Σ_{d | n} φ(n/d) · tr(A^d)`.
pub fn burnside_cycle_count(tori: usize, edges: &[(usize, usize, i64)], n: u64) -> u64 {
    let mut a = vec![vec![0u64; tori]; tori];
    for &(x, y, _) in edges {
        a[x][y] += 1;
    }
    let mul = |p: &Vec<Vec<u64>>, q: &Vec<Vec<u64>>| {
        let mut r = vec![vec![0u64; tori]; tori];
        for i in 0..tori {
            for k in 0..tori {
                for j in 0..tori {
                    r[i][j] += p[i][k] * q[k][j];
                }
            }
        }
        r
    };
    let mut powers = vec![a.clone()];
    for _ in 1..n {
        let next = mul(powers.last().unwrap(), &a);
        powers.push(next);
    }
    let trace = |m: &Vec<Vec<u64>>| (0..tori).map(|i| m[i][i]).sum::<u64>();
    let total: u64 = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| euler_phi(n / d) * trace(&powers[d as usize - 1])).sum();
    assert_eq!(total % n, 0);
    total / n
}

/// Least `(c, a, d, b)` over the twist-and-sign orbit of `m`, searching twist
/// exponents in `[-range, range]` on both sides.
pub fn brute_normal_form(m: &GluingMatrix, range: i64) -> (i64, i64, i64, i64) {
    let mut best = None;
    for s in 0..16 {
        let sg = |bit: i64| if s >> bit & 1 == 0 { 1 } else { -1 };
        let dl = GluingMatrix::new(sg(0), 0, 0, sg(1));
        let dr = GluingMatrix::new(sg(2), 0, 0, sg(3));
        for l in -range..=range {
            for r in -range..=range {
                let n = dl.mul(&GluingMatrix::twist(l)).mul(m).mul(&GluingMatrix::twist(r)).mul(&dr);
                if n.c > 0 && (0..n.c).contains(&n.a) && (0..n.c).contains(&n.d) {
                    let key = (n.c, n.a, n.d, n.b);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
    }
    best.expect("orbit reaches a reduced form within range")
}

/// Every permutation of `items`, in lexicographic order of positions.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x.clone());
            out.push(tail);
        }
    }
    out
}

/// Cycles of a permutation of `1..=n` given as images `perm[d - 1]`.
pub fn cycles_of(perm: &[Dart]) -> Vec<Vec<Dart>> {
    let n = perm.len();
    let mut seen = vec![false; n + 1];
    let mut out = Vec::new();
    for start in 1..=n as Dart {
        if seen[start as usize] {
            continue;
        }
        let mut c = vec![start];
        seen[start as usize] = true;
        let mut x = perm[start as usize - 1];
        while x != start {
            c.push(x);
            seen[x as usize] = true;
            x = perm[x as usize - 1];
        }
        out.push(c);
    }
    out
}
