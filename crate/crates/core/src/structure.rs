//! Abstract finitely ramified self-similar structures and their finite levels.
//!
//! A structure is `N` cells glued along points of a base set `F` of size `N0`.
//! Files use 1-based indices; everything in memory is 0-based.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::Weight;

/// Structure description as it appears in a configuration file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureSpec {
    pub name: String,
    #[serde(rename = "N")]
    pub n_cells: usize,
    #[serde(rename = "N0")]
    pub n_points: usize,
    /// Generator pairs `[i, x, i2, x2]`, 1-based.
    pub relation: Vec<[usize; 4]>,
    /// Permutations of `1..=N`, 1-based. May be empty for the trivial group.
    #[serde(default)]
    pub group: Vec<Vec<usize>>,
    pub alpha: Vec<Weight>,
    pub beta: Vec<Weight>,
}

impl StructureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The Sierpinski gasket with its full symmetry group S3.
    pub fn gasket() -> Self {
        StructureSpec {
            name: "gasket".into(),
            n_cells: 3,
            n_points: 3,
            relation: vec![[1, 2, 2, 1], [1, 3, 3, 1], [2, 3, 3, 2]],
            group: vec![
                vec![1, 2, 3],
                vec![2, 1, 3],
                vec![1, 3, 2],
                vec![3, 2, 1],
                vec![2, 3, 1],
                vec![3, 1, 2],
            ],
            alpha: vec![Weight::one(), Weight::one(), Weight::one()],
            beta: vec![Weight::one(), Weight::one(), Weight::one()],
        }
    }

    /// The unit interval cut at `alpha`, with energy weights `(alpha, 1 - alpha)`
    /// and measure weights `(1 - alpha, alpha)`.
    pub fn interval(alpha: Weight) -> Self {
        let one_minus = match alpha.exact() {
            Some(a) => Weight::from_ratio(BigRational::from_integer(1.into()) - a),
            None => Weight::from_f64(1.0 - alpha.value()),
        };
        StructureSpec {
            name: format!("interval:{alpha}"),
            n_cells: 2,
            n_points: 2,
            relation: vec![[1, 2, 2, 1]],
            group: vec![],
            alpha: vec![alpha.clone(), one_minus.clone()],
            beta: vec![one_minus, alpha],
        }
    }

    /// Resolve a builtin name: `gasket` or `interval:<alpha>`.
    pub fn builtin(name: &str) -> Result<Self> {
        if name == "gasket" {
            return Ok(Self::gasket());
        }
        if let Some(a) = name.strip_prefix("interval:") {
            let w: Weight = a.parse().map_err(|e| Error::Malformed(format!("{e}")))?;
            if !(w.value() > 0.0 && w.value() < 1.0) {
                return Err(Error::Malformed(format!("interval parameter {w} not in (0,1)")));
            }
            return Ok(Self::interval(w));
        }
        Err(Error::Malformed(format!("unknown builtin structure {name:?}")))
    }

    /// Structural checks that make the spec unusable rather than merely
    /// non-conforming.
    fn check_well_formed(&self) -> Result<()> {
        let (n, n0) = (self.n_cells, self.n_points);
        if n0 < 2 || n0 > n {
            return Err(Error::Malformed(format!("need 1 < N0 <= N, got N={n}, N0={n0}")));
        }
        if self.alpha.len() != n || self.beta.len() != n {
            return Err(Error::Malformed(format!(
                "alpha and beta need {n} entries, got {} and {}",
                self.alpha.len(),
                self.beta.len()
            )));
        }
        for (k, w) in self.alpha.iter().chain(&self.beta).enumerate() {
            if !w.is_positive() {
                let which = if k < n { "alpha" } else { "beta" };
                return Err(Error::NonPositiveWeight(format!("{which}[{}] = {w}", k % n + 1)));
            }
        }
        for r in &self.relation {
            let [i, x, i2, x2] = *r;
            if !(1..=n).contains(&i) || !(1..=n).contains(&i2) {
                return Err(Error::IndexOutOfRange(format!("cell index in {r:?}")));
            }
            if !(1..=n0).contains(&x) || !(1..=n0).contains(&x2) {
                return Err(Error::IndexOutOfRange(format!("point index in {r:?}")));
            }
        }
        for g in &self.group {
            let mut seen = vec![false; n];
            if g.len() != n {
                return Err(Error::Malformed(format!("permutation {g:?} has wrong length")));
            }
            for &v in g {
                if !(1..=n).contains(&v) || seen[v - 1] {
                    return Err(Error::Malformed(format!("{g:?} is not a permutation")));
                }
                seen[v - 1] = true;
            }
            if g[..n0].iter().any(|&v| v > n0) {
                return Err(Error::Malformed(format!("{g:?} does not preserve the base set")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "{tag}  {:<22} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Plain union-find with the smaller index as representative.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        while self.parent[x] as usize != root {
            let next = self.parent[x] as usize;
            self.parent[x] = root as u32;
            x = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

/// Equivalence classes of the relation on `{cells} x F` after closing the
/// listed generators under the group, symmetry and transitivity.
fn close_relation(spec: &StructureSpec) -> Vec<Vec<(usize, usize)>> {
    let (n, n0) = (spec.n_cells, spec.n_points);
    let group: Vec<Vec<usize>> = spec.group.iter().map(|g| g.iter().map(|v| v - 1).collect()).collect();
    let mut pairs: BTreeSet<((usize, usize), (usize, usize))> = BTreeSet::new();
    let mut queue: VecDeque<_> = spec
        .relation
        .iter()
        .map(|r| ((r[0] - 1, r[1] - 1), (r[2] - 1, r[3] - 1)))
        .collect();
    while let Some(p) = queue.pop_front() {
        if !pairs.insert(p) {
            continue;
        }
        for g in &group {
            let ((i, x), (j, y)) = p;
            let q = ((g[i], g[x]), (g[j], g[y]));
            if !pairs.contains(&q) {
                queue.push_back(q);
            }
        }
    }
    let mut uf = UnionFind::new(n * n0);
    for ((i, x), (j, y)) in pairs {
        uf.union(i * n0 + x, j * n0 + y);
    }
    let mut classes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n0];
    for k in 0..n * n0 {
        let r = uf.find(k);
        classes[r].push((k / n0, k % n0));
    }
    classes.into_iter().filter(|c| !c.is_empty()).collect()
}

fn weights_invariant(w: &[Weight], group: &[Vec<usize>]) -> bool {
    group.iter().all(|g| {
        (0..w.len()).all(|i| {
            let (a, b) = (&w[i], &w[g[i] - 1]);
            match (a.exact(), b.exact()) {
                (Some(x), Some(y)) => x == y,
                _ => (a.value() - b.value()).abs() <= 1e-12 * a.value().abs().max(b.value().abs()),
            }
        })
    })
}

/// Check the relation axioms, group invariance and assumption (H).
///
/// Returns an error only for specs that cannot be interpreted at all.
pub fn validate_structure(spec: &StructureSpec) -> Result<ValidationReport> {
    spec.check_well_formed()?;
    let (n, n0) = (spec.n_cells, spec.n_points);
    let classes = close_relation(spec);
    let mut checks = Vec::new();

    let mut bad = Vec::new();
    for c in &classes {
        for (a, &(i, x)) in c.iter().enumerate() {
            for &(j, y) in &c[a + 1..] {
                if i == j && x != y {
                    bad.push(format!("({},{})~({},{})", i + 1, x + 1, j + 1, y + 1));
                }
            }
        }
    }
    checks.push(AxiomCheck {
        name: "injective-on-cells",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "(i,x)R(i,y) only for x=y".into()
        } else {
            format!("same cell, different points: {}", bad.join(", "))
        },
    });

    let mut bad = Vec::new();
    for c in &classes {
        if c.len() > 1 {
            for &(i, x) in c {
                if i == x {
                    bad.push(format!("({},{})", i + 1, x + 1));
                }
            }
        }
    }
    checks.push(AxiomCheck {
        name: "fixed-points-singleton",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "class of (i,i) is a singleton".into()
        } else {
            format!("non-singleton class of {}", bad.join(", "))
        },
    });

    let mut uf = UnionFind::new(n);
    for c in &classes {
        for w in c.windows(2) {
            uf.union(w[0].0, w[1].0);
        }
    }
    let components = (0..n).filter(|&i| uf.find(i) == i).count();
    checks.push(AxiomCheck {
        name: "cells-connected",
        passed: components == 1,
        detail: format!("{components} connected component(s) of the cell graph"),
    });

    let inv = weights_invariant(&spec.alpha, &spec.group) && weights_invariant(&spec.beta, &spec.group);
    checks.push(AxiomCheck {
        name: "group-invariance",
        passed: inv,
        detail: if inv {
            format!(
                "alpha, beta invariant under {} permutation(s); relation closed under the group",
                spec.group.len()
            )
        } else {
            "alpha or beta not invariant under the group".into()
        },
    });

    let products: Vec<Weight> = spec
        .alpha
        .iter()
        .zip(&spec.beta)
        .map(|(a, b)| match (a.exact(), b.exact()) {
            (Some(x), Some(y)) => Weight::from_ratio(x * y),
            _ => Weight::from_f64(a.value() * b.value()),
        })
        .collect();
    let all_exact = spec.alpha.iter().chain(&spec.beta).all(|w| w.exact().is_some());
    let h = if all_exact {
        products.windows(2).all(|w| w[0].exact() == w[1].exact())
    } else {
        let p0 = products[0].value();
        products.iter().all(|p| (p.value() - p0).abs() <= 1e-12 * p0.abs())
    };
    checks.push(AxiomCheck {
        name: "assumption-H",
        passed: h,
        detail: format!(
            "alpha_i*beta_i = [{}] ({})",
            products.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "),
            if all_exact { "exact" } else { "tol 1e-12" }
        ),
    });
    let _ = n0;
    Ok(ValidationReport { checks })
}

/// A validated structure ready for lattice construction.
#[derive(Clone, Debug)]
pub struct Structure {
    spec: StructureSpec,
    classes: Vec<Vec<(usize, usize)>>,
    group: Vec<Vec<usize>>,
}

impl Structure {
    pub fn new(spec: StructureSpec) -> Result<Self> {
        let report = validate_structure(&spec)?;
        if !report.passed() {
            let names: Vec<_> = report.failures().iter().map(|c| c.name).collect();
            return Err(Error::Validation(names.join(", ")));
        }
        let classes = close_relation(&spec);
        let group = spec.group.iter().map(|g| g.iter().map(|v| v - 1).collect()).collect();
        Ok(Structure { spec, classes, group })
    }

    pub fn gasket() -> Self {
        Self::new(StructureSpec::gasket()).expect("builtin gasket is valid")
    }

    pub fn interval(alpha: Weight) -> Result<Self> {
        Self::new(StructureSpec::interval(alpha))
    }

    pub fn spec(&self) -> &StructureSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// `N`
    pub fn n_cells(&self) -> usize {
        self.spec.n_cells
    }

    /// `N0 = |F|`
    pub fn n_points(&self) -> usize {
        self.spec.n_points
    }

    /// 0-based permutations; the identity is not added implicitly.
    pub fn group(&self) -> &[Vec<usize>] {
        &self.group
    }

    pub fn alpha(&self) -> &[Weight] {
        &self.spec.alpha
    }

    pub fn beta(&self) -> &[Weight] {
        &self.spec.beta
    }

    /// Closed relation classes of size at least two.
    pub fn glued_classes(&self) -> impl Iterator<Item = &Vec<(usize, usize)>> {
        self.classes.iter().filter(|c| c.len() > 1)
    }

    pub fn build_level(&self, n: usize) -> LatticeLevel {
        build_level(self, n)
    }
}

/// The finite quotient `F_<n>` of words `(w_1, ..., w_n, x)`.
///
/// `w_1` names the outermost cell. Vertex ids follow the lexicographic order
/// of the smallest word in each class.
#[derive(Clone, Debug)]
pub struct LatticeLevel {
    pub n: usize,
    n_cells: usize,
    n_points: usize,
    word_vertex: Vec<u32>,
    rep_word: Vec<u32>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    is_boundary: Vec<bool>,
}

/// Build `F_<n>` by a union-find quotient of all words.
pub fn build_level(s: &Structure, n: usize) -> LatticeLevel {
    let (nc, n0) = (s.n_cells(), s.n_points());
    let stride: Vec<usize> = (0..=n).map(|k| nc.pow((n - k) as u32) * n0).collect();
    // stride[k] = size of the block of words sharing a prefix of length k
    let total = stride[0];
    let mut uf = UnionFind::new(total);
    let pairs: Vec<((usize, usize), (usize, usize))> = s
        .glued_classes()
        .flat_map(|c| {
            c.iter()
                .flat_map(move |&a| c.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        })
        .collect();
    for k0 in 1..=n {
        let plen = n - k0;
        let nprefix = nc.pow(plen as u32);
        for p in 0..nprefix {
            let base = p * stride[plen];
            for &((c, x), (c2, x2)) in &pairs {
                uf.union(base + tail_code(c, x, k0, nc, n0), base + tail_code(c2, x2, k0, nc, n0));
            }
        }
    }
    let mut vertex_of_root = vec![u32::MAX; total];
    let mut rep_word = Vec::new();
    let mut word_vertex = vec![0u32; total];
    for w in 0..total {
        let r = uf.find(w);
        if vertex_of_root[r] == u32::MAX {
            // r <= w and r is visited first, so r == w here
            vertex_of_root[r] = rep_word.len() as u32;
            rep_word.push(r as u32);
        }
        word_vertex[w] = vertex_of_root[r];
    }
    let nv = rep_word.len();
    let boundary: Vec<usize> = (0..n0)
        .map(|x| {
            let word = vec![x; n + 1];
            word_vertex[encode(&word, nc, n0)] as usize
        })
        .collect();
    let mut is_boundary = vec![false; nv];
    for &b in &boundary {
        is_boundary[b] = true;
    }
    let interior = (0..nv).filter(|&v| !is_boundary[v]).collect();
    LatticeLevel {
        n,
        n_cells: nc,
        n_points: n0,
        word_vertex,
        rep_word,
        boundary,
        interior,
        is_boundary,
    }
}

/// Code of the word suffix `(c, x, x, ..., x)` with `k0` letters after the prefix.
fn tail_code(c: usize, x: usize, k0: usize, nc: usize, n0: usize) -> usize {
    let mut code = c;
    for _ in 1..k0 {
        code = code * nc + x;
    }
    code * n0 + x
}

fn encode(word: &[usize], nc: usize, n0: usize) -> usize {
    let (last, cells) = word.split_last().expect("non-empty word");
    cells.iter().fold(0, |acc, &c| acc * nc + c) * n0 + last
}

impl LatticeLevel {
    pub fn num_vertices(&self) -> usize {
        self.rep_word.len()
    }

    /// `boundary()[x]` is the vertex of the diagonal word `(x, ..., x)`.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Non-boundary vertex ids in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Vertex of a word of length `n + 1`.
    pub fn vertex_of(&self, word: &[usize]) -> usize {
        assert_eq!(word.len(), self.n + 1, "word length must be n + 1");
        self.word_vertex[encode(word, self.n_cells, self.n_points)] as usize
    }

    /// Smallest word of a vertex.
    pub fn word_of(&self, v: usize) -> Vec<usize> {
        let mut code = self.rep_word[v] as usize;
        let mut word = vec![0; self.n + 1];
        word[self.n] = code % self.n_points;
        code /= self.n_points;
        for k in (0..self.n).rev() {
            word[k] = code % self.n_cells;
            code /= self.n_cells;
        }
        word
    }

    /// Sorted vertex ids of the cell `F_<n-p, prefix>` with `p = prefix.len()`.
    pub fn cell(&self, prefix: &[usize]) -> Vec<usize> {
        assert!(prefix.len() <= self.n);
        let block = self.n_cells.pow((self.n - prefix.len()) as u32) * self.n_points;
        let start = prefix.iter().fold(0, |acc, &c| acc * self.n_cells + c) * block;
        let set: BTreeSet<usize> = self.word_vertex[start..start + block]
            .iter()
            .map(|&v| v as usize)
            .collect();
        set.into_iter().collect()
    }

    /// All `<0>`-cells in lexicographic order of their address, each as the
    /// list of vertex ids of its points `x = 0..N0`.
    pub fn zero_cells(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let count = self.n_cells.pow(self.n as u32);
        (0..count)
            .map(|a| {
                let mut addr = vec![0; self.n];
                let mut r = a;
                for k in (0..self.n).rev() {
                    addr[k] = r % self.n_cells;
                    r /= self.n_cells;
                }
                let verts = (0..self.n_points)
                    .map(|x| self.word_vertex[a * self.n_points + x] as usize)
                    .collect();
                (addr, verts)
            })
            .collect()
    }

    /// Map the vertices of `lower = F_<n-1>` into the cell `i` of this level.
    pub fn embed(&self, lower: &LatticeLevel, i: usize) -> Vec<usize> {
        assert_eq!(lower.n + 1, self.n);
        (0..lower.num_vertices())
            .map(|v| {
                let mut w = vec![i];
                w.extend(lower.word_of(v));
                self.vertex_of(&w)
            })
            .collect()
    }

    /// Vertex permutation induced by a 0-based cell permutation, or `None`
    /// when the induced map is not well defined on classes.
    pub fn induced_permutation(&self, g: &[usize]) -> Option<Vec<usize>> {
        let mut image = vec![usize::MAX; self.num_vertices()];
        let mut word = vec![0; self.n + 1];
        for code in 0..self.word_vertex.len() {
            let mut r = code;
            word[self.n] = r % self.n_points;
            r /= self.n_points;
            for k in (0..self.n).rev() {
                word[k] = r % self.n_cells;
                r /= self.n_cells;
            }
            let gw: Vec<usize> = word.iter().map(|&c| g[c]).collect();
            let v = self.word_vertex[code] as usize;
            let gv = self.vertex_of(&gw);
            if image[v] == usize::MAX {
                image[v] = gv;
            } else if image[v] != gv {
                return None;
            }
        }
        Some(image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gasket_and_interval_validate() {
        assert!(validate_structure(&StructureSpec::gasket()).unwrap().passed());
        let spec = StructureSpec::interval(Weight::ratio(1, 3));
        let rep = validate_structure(&spec).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.checks.len(), 5);
    }

    #[test]
    fn extra_pair_breaks_singleton_axiom() {
        let mut spec = StructureSpec::gasket();
        spec.relation.push([1, 1, 2, 1]);
        let rep = validate_structure(&spec).unwrap();
        let failed: Vec<_> = rep.failures().iter().map(|c| c.name).collect();
        assert!(failed.contains(&"fixed-points-singleton"), "{rep}");
        assert!(Structure::new(spec).is_err());
    }

    #[test]
    fn malformed_inputs_are_errors() {
        let mut s = StructureSpec::gasket();
        s.group.push(vec![1, 1, 2]);
        assert!(matches!(validate_structure(&s), Err(Error::Malformed(_))));
        let mut s = StructureSpec::gasket();
        s.alpha[1] = Weight::from_f64(0.0);
        assert!(matches!(validate_structure(&s), Err(Error::NonPositiveWeight(_))));
        let mut s = StructureSpec::gasket();
        s.relation.push([4, 1, 1, 2]);
        assert!(matches!(validate_structure(&s), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn assumption_h_and_connectivity_failures() {
        let mut s = StructureSpec::interval(Weight::ratio(1, 3));
        s.beta = vec![Weight::one(), Weight::one()];
        let rep = validate_structure(&s).unwrap();
        assert_eq!(rep.failures()[0].name, "assumption-H");
        let mut s = StructureSpec::gasket();
        s.relation = vec![[1, 2, 2, 1]];
        s.group.clear();
        let rep = validate_structure(&s).unwrap();
        assert_eq!(rep.failures()[0].name, "cells-connected");
    }

    #[test]
    fn vertex_counts() {
        let g = Structure::gasket();
        assert_eq!(g.build_level(0).num_vertices(), 3);
        assert_eq!(g.build_level(1).num_vertices(), 6);
        for n in 0..=7 {
            let lat = g.build_level(n);
            assert_eq!(lat.num_vertices(), (3usize.pow(n as u32 + 1) + 3) / 2);
            assert_eq!(lat.boundary().len(), 3);
        }
        let iv = Structure::interval(Weight::ratio(1, 3)).unwrap();
        for n in 0..=10 {
            assert_eq!(iv.build_level(n).num_vertices(), (1 << n) + 1);
        }
    }

    #[test]
    fn level_zero_is_all_boundary() {
        let lat = Structure::gasket().build_level(0);
        assert_eq!(lat.boundary(), &[0, 1, 2]);
        assert!(lat.interior().is_empty());
    }

    #[test]
    fn ids_follow_smallest_word() {
        let lat = Structure::gasket().build_level(2);
        let mut prev = Vec::new();
        for v in 0..lat.num_vertices() {
            let w = lat.word_of(v);
            assert_eq!(lat.vertex_of(&w), v);
            assert!(w > prev);
            prev = w;
        }
        // boundary ids increase with x
        assert!(lat.boundary().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cells_meet_only_in_boundaries() {
        let g = Structure::gasket();
        for n in 1..=4 {
            let upper = g.build_level(n);
            let lower = g.build_level(n - 1);
            let copies: Vec<Vec<usize>> = (0..3).map(|i| upper.embed(&lower, i)).collect();
            for i in 0..3 {
                let set: BTreeSet<_> = copies[i].iter().collect();
                assert_eq!(set.len(), lower.num_vertices(), "embedding must be injective");
                assert_eq!(upper.cell(&[i]), {
                    let mut c = copies[i].clone();
                    c.sort();
                    c
                });
                for j in i + 1..3 {
                    let bi: BTreeSet<_> = lower.boundary().iter().map(|&b| copies[i][b]).collect();
                    for v in copies[i].iter().filter(|v| copies[j].contains(v)) {
                        assert!(bi.contains(v));
                    }
                }
            }
        }
    }

    #[test]
    fn group_acts_on_levels() {
        let g = Structure::gasket();
        for n in 0..=3 {
            let lat = g.build_level(n);
            for p in g.group() {
                let perm = lat.induced_permutation(p).expect("well defined");
                let set: BTreeSet<_> = perm.iter().collect();
                assert_eq!(set.len(), lat.num_vertices());
                let bset: BTreeSet<_> = lat.boundary().iter().map(|&b| perm[b]).collect();
                let orig: BTreeSet<_> = lat.boundary().iter().copied().collect();
                assert_eq!(bset, orig);
            }
        }
    }
}
