//! Leveled rooted trees: fiber trees, bushes and spring bushes.
//!
//! A [`RootedTree`] is immutable once built. Vertices are addressed by their
//! index `0..len()`; every vertex also carries a string label used by the
//! serialization formats. The level of a vertex is its distance to the root.
//!
//! Leaves are extremal vertices different from the root. The single-vertex
//! tree is treated as having one "leaf" at level 0 (its root): its type is
//! `(1)` and its leaf-level multiset is `{0}`. This keeps the point count of
//! every Danielewski-Fieseler fiber at least one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigUint, One, ToPrimitive};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Default bound on the number of automorphisms enumerated eagerly.
pub const DEFAULT_AUT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    labels: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    root: usize,
}

impl RootedTree {
    /// Builds a tree from parent links. Exactly one vertex may lack a parent,
    /// every vertex must reach it, and labels must be distinct.
    pub fn from_parents(labels: Vec<String>, parent: Vec<Option<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        if parent.len() != n {
            return Err(Error::InvalidTree("label/parent length mismatch".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidTree(format!("duplicate node id {l:?}")));
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for (v, &pv) in parent.iter().enumerate() {
            if let Some(p) = pv {
                if p >= n {
                    return Err(Error::InvalidTree(format!("parent index {p} out of range")));
                }
                children[p].push(v);
            }
        }
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut stack = vec![root];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                level[c] = level[v] + 1;
                reached += 1;
                stack.push(c);
            }
        }
        if reached != n {
            return Err(Error::InvalidTree(
                "parent links contain a cycle or a vertex not connected to the root".into(),
            ));
        }
        Ok(Self {
            labels,
            parent,
            children,
            level,
            root,
        })
    }

    /// Builds a tree from parent indices, labelling vertices by their index.
    pub fn from_parent_indices(parent: Vec<Option<usize>>) -> Result<Self> {
        let labels = (0..parent.len()).map(|i| i.to_string()).collect();
        Self::from_parents(labels, parent)
    }

    pub fn single_vertex() -> Self {
        Self::from_parent_indices(vec![None]).expect("single vertex is a tree")
    }

    /// Chain with `m` edges (root plus `m` further vertices).
    pub fn chain(m: usize) -> Self {
        let parent = (0..=m).map(|i| i.checked_sub(1)).collect();
        Self::from_parent_indices(parent).expect("chain is a tree")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn num_edges(&self) -> usize {
        self.len() - 1
    }

    pub fn height(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v != self.root && self.children[v].is_empty()
    }

    /// Leaves in index order (empty for the single-vertex tree).
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Fiber components of the tree: its leaves, or the root alone for the
    /// single-vertex tree.
    pub fn components(&self) -> Vec<usize> {
        if self.len() == 1 {
            vec![self.root]
        } else {
            self.leaves()
        }
    }

    /// Sorted multiset of leaf levels; `{0}` for the single-vertex tree.
    pub fn leaves_with_levels(&self) -> Vec<usize> {
        let mut lv: Vec<usize> = self.components().iter().map(|&v| self.level[v]).collect();
        lv.sort_unstable();
        lv
    }

    pub fn tree_type(&self) -> TreeType {
        let h = self.height();
        let mut counts = vec![0usize; h + 1];
        for v in self.components() {
            counts[self.level[v]] += 1;
        }
        TreeType(counts)
    }

    /// Every vertex has at most one child.
    pub fn is_chain(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    /// Every branch at the root is a chain.
    pub fn is_bush(&self) -> bool {
        (0..self.len())
            .filter(|&v| v != self.root)
            .all(|v| self.children[v].len() <= 1)
    }

    /// The truncation one level below the top is a bush (sharing the root).
    pub fn is_spring_bush(&self) -> Result<bool> {
        let h = self.height();
        if h == 0 {
            return Err(Error::Precondition(
                "spring bush test needs a tree of height at least 1".into(),
            ));
        }
        // every top-level vertex hangs off a top vertex of the truncation,
        // which is a leaf there
        Ok(self.truncate(h - 1).is_bush())
    }

    /// Subtree of vertices with level at most `l`; labels and relative order
    /// are preserved.
    pub fn truncate(&self, l: usize) -> RootedTree {
        let keep: Vec<usize> = (0..self.len()).filter(|&v| self.level[v] <= l).collect();
        let mut new_index = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let parent = keep
            .iter()
            .map(|&v| self.parent[v].map(|p| new_index[p]))
            .collect();
        RootedTree::from_parents(labels, parent).expect("truncation of a tree is a tree")
    }

    /// Vertex of the branch (child of the root) containing `v`.
    pub fn branch_of(&self, v: usize) -> Option<usize> {
        if v == self.root {
            return None;
        }
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            if p == self.root {
                return Some(cur);
            }
            cur = p;
        }
        None
    }

    /// Height of the subtree hanging at `v`, measured from `v`.
    pub fn subtree_height(&self, v: usize) -> usize {
        self.children[v]
            .iter()
            .map(|&c| 1 + self.subtree_height(c))
            .max()
            .unwrap_or(0)
    }

    /// AHU-style canonical code of every vertex. Child codes are sorted
    /// lexicographically, so deeper subtrees sort first.
    pub fn canonical_codes(&self) -> Vec<String> {
        self.codes_with(|_| None)
    }

    fn codes_with(&self, label: impl Fn(usize) -> Option<usize>) -> Vec<String> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.level[v]));
        let mut codes = vec![String::new(); self.len()];
        for v in order {
            let mut kids: Vec<&str> = self.children[v]
                .iter()
                .map(|&c| codes[c].as_str())
                .collect();
            kids.sort_unstable();
            let mut code = String::from("(");
            if let Some(k) = label(v) {
                code.push_str(&k.to_string());
            }
            for k in kids {
                code.push_str(k);
            }
            code.push(')');
            codes[v] = code;
        }
        codes
    }

    pub fn canonical_code(&self) -> String {
        self.canonical_codes().swap_remove(self.root)
    }

    /// Children of `v` in canonical order: by canonical code, then by index.
    pub fn canonical_children(&self, v: usize, codes: &[String]) -> Vec<usize> {
        let mut kids = self.children[v].clone();
        kids.sort_by(|&a, &b| codes[a].cmp(&codes[b]).then(a.cmp(&b)));
        kids
    }

    /// `Γ*`: the tree with all leaves and their edges deleted, together with
    /// the map from its vertices to vertices of `self`.
    pub fn star(&self) -> (RootedTree, Vec<usize>) {
        let keep: Vec<usize> = (0..self.len()).filter(|&v| !self.is_leaf(v)).collect();
        let mut new_index = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let parent = keep
            .iter()
            .map(|&v| self.parent[v].map(|p| new_index[p]))
            .collect();
        let star = RootedTree::from_parents(labels, parent).expect("star of a tree is a tree");
        (star, keep)
    }

    /// Number of leaf children of `v`.
    pub fn leaf_children(&self, v: usize) -> usize {
        self.children[v]
            .iter()
            .filter(|&&c| self.is_leaf(c))
            .count()
    }

    /// Nested-list text form: a node is `[child, child, ...]`, a leaf `[]`.
    pub fn to_nested(&self) -> String {
        let mut out = String::new();
        self.write_nested(self.root, &mut out);
        out
    }

    fn write_nested(&self, v: usize, out: &mut String) {
        out.push('[');
        for (i, &c) in self.children[v].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_nested(c, out);
        }
        out.push(']');
    }

    /// Parses the nested-list form. Vertices are labelled by preorder index.
    pub fn from_nested(s: &str) -> Result<Self> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut parent = Vec::new();
        parse_nested_node(&bytes, &mut pos, None, &mut parent)?;
        if pos != bytes.len() {
            return Err(Error::Parse(format!(
                "trailing input after tree at character {pos}"
            )));
        }
        Self::from_parent_indices(parent)
    }

    /// Adjacency JSON form `{"parent": {"<id>": "<id>" | null}}`.
    pub fn to_adjacency_json(&self) -> Value {
        let mut m = Map::new();
        for v in 0..self.len() {
            let p = match self.parent[v] {
                Some(p) => Value::String(self.labels[p].clone()),
                None => Value::Null,
            };
            m.insert(self.labels[v].clone(), p);
        }
        let mut outer = Map::new();
        outer.insert("parent".into(), Value::Object(m));
        Value::Object(outer)
    }

    pub fn from_adjacency_json(v: &Value) -> Result<Self> {
        let map = v
            .get("parent")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("adjacency form needs a \"parent\" object".into()))?;
        let labels: Vec<String> = map.keys().cloned().collect();
        let index: BTreeMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut parent = Vec::with_capacity(labels.len());
        for l in &labels {
            match &map[l] {
                Value::Null => parent.push(None),
                Value::String(p) => {
                    let pi = index.get(p.as_str()).ok_or_else(|| {
                        Error::Parse(format!("node {l:?} has unknown parent {p:?}"))
                    })?;
                    parent.push(Some(*pi));
                }
                other => {
                    return Err(Error::Parse(format!(
                        "parent of {l:?} must be a string or null, got {other}"
                    )))
                }
            }
        }
        Self::from_parents(labels, parent)
    }

    /// Accepts either serialization: JSON adjacency (leading `{`) or nested list.
    pub fn parse_any(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            let v: Value = serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
            Self::from_adjacency_json(&v)
        } else {
            Self::from_nested(t)
        }
    }

    /// Inserts a chain of `a` new vertices below the root; the bottom of the
    /// chain becomes the new root and every old level grows by `a`.
    pub fn stretched(&self, a: usize) -> RootedTree {
        if a == 0 {
            return self.clone();
        }
        let n = self.len();
        let mut labels = self.labels.clone();
        let mut parent = self.parent.clone();
        let mut fresh = |k: usize| {
            let mut l = format!("s{k}");
            while labels.contains(&l) {
                l.push('\'');
            }
            l
        };
        let new_labels: Vec<String> = (0..a).map(&mut fresh).collect();
        // new vertices n..n+a: n is the new root, n+a-1 is attached above the old root
        for (k, l) in new_labels.into_iter().enumerate() {
            labels.push(l);
            parent.push(if k == 0 { None } else { Some(n + k - 1) });
        }
        parent[self.root] = Some(n + a - 1);
        RootedTree::from_parents(labels, parent).expect("stretching keeps a tree")
    }
}

fn parse_nested_node(
    s: &[char],
    pos: &mut usize,
    parent_of: Option<usize>,
    parent: &mut Vec<Option<usize>>,
) -> Result<()> {
    if s.get(*pos) != Some(&'[') {
        return Err(Error::Parse(format!("expected '[' at character {}", *pos)));
    }
    *pos += 1;
    let me = parent.len();
    parent.push(parent_of);
    if s.get(*pos) == Some(&']') {
        *pos += 1;
        return Ok(());
    }
    loop {
        parse_nested_node(s, pos, Some(me), parent)?;
        match s.get(*pos) {
            Some(',') => *pos += 1,
            Some(']') => {
                *pos += 1;
                return Ok(());
            }
            _ => {
                return Err(Error::Parse(format!(
                    "expected ',' or ']' at character {}",
                    *pos
                )))
            }
        }
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_nested())
    }
}

impl FromStr for RootedTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_any(s)
    }
}

/// Leaf counts per level `(n_0, ..., n_h)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeType(Vec<usize>);

impl TreeType {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        match counts.as_slice() {
            [] => Err(Error::InvalidType("empty type".into())),
            [n0] if *n0 != 1 => Err(Error::InvalidType(
                "a height-0 type must be (1), the single-vertex tree".into(),
            )),
            [.., last] if counts.len() > 1 && *last == 0 => Err(Error::InvalidType(
                "the top entry of a type of height >= 1 must be positive".into(),
            )),
            _ => Ok(Self(counts)),
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn height(&self) -> usize {
        self.0.len() - 1
    }

    pub fn num_leaves(&self) -> usize {
        self.0.iter().sum()
    }

    /// Multiset of leaf levels encoded by the type, sorted.
    pub fn levels(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(l, &n)| std::iter::repeat_n(l, n))
            .collect()
    }
}

impl fmt::Display for TreeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for TreeType {
    type Err = Error;
    /// Accepts `(0,2,1,2)`, `[0,2,1,2]` or `0,2,1,2`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        let counts = t
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad type entry {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        TreeType::new(counts)
    }
}

/// Bush with exactly `n_i` branches that are chains of length `i`, longest
/// branches first.
pub fn bush_of_type(tt: &TreeType) -> Result<RootedTree> {
    let h = tt.height();
    if h == 0 {
        return Ok(RootedTree::single_vertex());
    }
    if tt.counts()[0] != 0 {
        return Err(Error::InvalidType(format!(
            "{tt}: a leaf on level 0 cannot coexist with other vertices"
        )));
    }
    let mut parent = vec![None];
    for len in (1..=h).rev() {
        for _ in 0..tt.counts()[len] {
            let mut prev = 0;
            for _ in 0..len {
                parent.push(Some(prev));
                prev = parent.len() - 1;
            }
        }
    }
    RootedTree::from_parent_indices(parent)
}

/// Trunk chain `v_0, ..., v_{h-1}` with `n_{i+1}` leaves attached to `v_i`.
pub fn gizatullin_tree(tt: &TreeType) -> Result<RootedTree> {
    let h = tt.height();
    if h == 0 || tt.counts()[0] != 0 {
        return Err(Error::InvalidType(format!(
            "{tt}: a Gizatullin tree needs height >= 1 and n_0 = 0"
        )));
    }
    let mut parent: Vec<Option<usize>> = (0..h).map(|i| i.checked_sub(1)).collect();
    for i in 0..h {
        for _ in 0..tt.counts()[i + 1] {
            parent.push(Some(i));
        }
    }
    RootedTree::from_parent_indices(parent)
}

/// Root-preserving bijection between the vertex sets of two trees, stored as
/// `map[v] = image of v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeIso {
    pub map: Vec<usize>,
}

impl TreeIso {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TreeIso) -> TreeIso {
        TreeIso {
            map: self.map.iter().map(|&v| next.map[v]).collect(),
        }
    }

    pub fn inverse(&self) -> TreeIso {
        let mut inv = vec![0; self.map.len()];
        for (v, &w) in self.map.iter().enumerate() {
            inv[w] = v;
        }
        TreeIso { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(v, &w)| v == w)
    }

    /// Checks bijectivity, root to root and preservation of parent links.
    pub fn is_valid(&self, from: &RootedTree, to: &RootedTree) -> bool {
        if self.map.len() != from.len() || from.len() != to.len() {
            return false;
        }
        let mut hit = vec![false; to.len()];
        for &w in &self.map {
            if w >= to.len() || std::mem::replace(&mut hit[w], true) {
                return false;
            }
        }
        if self.map[from.root()] != to.root() {
            return false;
        }
        (0..from.len()).all(|v| from.parent(v).map(|p| self.map[p]) == to.parent(self.map[v]))
    }
}

/// A root-preserving isomorphism, if one exists.
pub fn tree_iso(t1: &RootedTree, t2: &RootedTree) -> Option<TreeIso> {
    if t1.len() != t2.len() {
        return None;
    }
    let c1 = t1.canonical_codes();
    let c2 = t2.canonical_codes();
    if c1[t1.root()] != c2[t2.root()] {
        return None;
    }
    let mut map = vec![usize::MAX; t1.len()];
    pair_subtrees(t1, &c1, t1.root(), t2, &c2, t2.root(), &mut map);
    Some(TreeIso { map })
}

fn pair_subtrees(
    t1: &RootedTree,
    c1: &[String],
    v: usize,
    t2: &RootedTree,
    c2: &[String],
    w: usize,
    map: &mut [usize],
) {
    map[v] = w;
    let a = t1.canonical_children(v, c1);
    let b = t2.canonical_children(w, c2);
    for (x, y) in a.into_iter().zip(b) {
        pair_subtrees(t1, c1, x, t2, c2, y, map);
    }
}

fn factorial(m: usize) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Automorphisms of a (vertex-labelled) rooted tree, indexed by a mixed
/// radix: each vertex contributes a permutation of every class of
/// isomorphic children.
#[derive(Clone, Debug)]
struct AutIndex {
    sorted: Vec<Vec<usize>>,
    /// per vertex, (start, len) of each class of equal codes in `sorted`
    classes: Vec<Vec<(usize, usize)>>,
    order: BigUint,
}

impl AutIndex {
    fn new(t: &RootedTree, label: impl Fn(usize) -> Option<usize>) -> Self {
        let codes = t.codes_with(label);
        let mut sorted = Vec::with_capacity(t.len());
        let mut classes = Vec::with_capacity(t.len());
        let mut order = BigUint::one();
        for v in 0..t.len() {
            let kids = t.canonical_children(v, &codes);
            let mut cls = Vec::new();
            let mut s = 0;
            while s < kids.len() {
                let mut e = s + 1;
                while e < kids.len() && codes[kids[e]] == codes[kids[s]] {
                    e += 1;
                }
                if e - s > 1 {
                    cls.push((s, e - s));
                    order *= factorial(e - s);
                }
                s = e;
            }
            sorted.push(kids);
            classes.push(cls);
        }
        Self {
            sorted,
            classes,
            order,
        }
    }

    /// The `idx`-th automorphism; `idx < order`.
    fn nth(&self, t: &RootedTree, mut idx: u64) -> TreeIso {
        // decode the mixed-radix digits into per-vertex child permutations
        let mut perms: Vec<Vec<usize>> = Vec::with_capacity(t.len());
        for v in 0..t.len() {
            let mut perm: Vec<usize> = (0..self.sorted[v].len()).collect();
            for &(s, m) in &self.classes[v] {
                let radix = factorial(m).to_u64().expect("class size fits");
                let digit = idx % radix;
                idx /= radix;
                let p = unrank_permutation(m, digit);
                for j in 0..m {
                    perm[s + j] = s + p[j];
                }
            }
            perms.push(perm);
        }
        let mut map = vec![usize::MAX; t.len()];
        let mut stack = vec![(t.root(), t.root())];
        while let Some((v, w)) = stack.pop() {
            map[v] = w;
            for (k, &c) in self.sorted[v].iter().enumerate() {
                stack.push((c, self.sorted[w][perms[v][k]]));
            }
        }
        TreeIso { map }
    }

    /// Generators: for each class, an adjacent transposition and (size >= 3)
    /// a full cycle of the isomorphic children.
    fn generators(&self, t: &RootedTree) -> Vec<TreeIso> {
        let mut gens = Vec::new();
        for v in 0..t.len() {
            for &(s, m) in &self.classes[v] {
                let mut cycles: Vec<Vec<usize>> = vec![{
                    let mut p: Vec<usize> = (0..m).collect();
                    p.swap(0, 1);
                    p
                }];
                if m >= 3 {
                    cycles.push((0..m).map(|j| (j + 1) % m).collect());
                }
                for p in cycles {
                    let mut map: Vec<usize> = (0..t.len()).collect();
                    for (j, &pj) in p.iter().enumerate() {
                        let from = self.sorted[v][s + j];
                        let to = self.sorted[v][s + pj];
                        self.map_subtree(from, to, &mut map);
                    }
                    gens.push(TreeIso { map });
                }
            }
        }
        gens
    }

    fn map_subtree(&self, from: usize, to: usize, map: &mut [usize]) {
        map[from] = to;
        for (a, b) in self.sorted[from].iter().zip(&self.sorted[to]) {
            self.map_subtree(*a, *b, map);
        }
    }
}

fn unrank_permutation(m: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    let mut out = Vec::with_capacity(m);
    for k in (1..=m).rev() {
        let f = (1..k as u64).product::<u64>();
        let i = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(i));
    }
    out
}

/// Structure of `Aut(Γ)` and of its effective quotient `Aut*(Γ) = Aut(Γ)/K`,
/// where `K` is the pointwise stabilizer of `Γ*`.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub order: BigUint,
    pub generators: Vec<TreeIso>,
    /// `|K|`.
    pub kernel_order: BigUint,
    /// `|Aut*(Γ)| = |Aut(Γ)| / |K|`.
    pub star_order: BigUint,
    /// `Γ*` and the embedding of its vertices into `Γ`.
    pub star: RootedTree,
    pub star_to_full: Vec<usize>,
}

pub fn aut_group(t: &RootedTree) -> AutGroup {
    let idx = AutIndex::new(t, |_| None);
    let (star, star_to_full) = t.star();
    let kernel_order = star_to_full.iter().fold(BigUint::one(), |acc, &v| {
        acc * factorial(t.leaf_children(v))
    });
    let star_order = &idx.order / &kernel_order;
    AutGroup {
        generators: idx.generators(t),
        order: idx.order,
        kernel_order,
        star_order,
        star,
        star_to_full,
    }
}

/// Lazily enumerates `Aut(Γ)`; fails when the order exceeds `cap`.
pub fn aut_elements(t: &RootedTree, cap: u64) -> Result<impl Iterator<Item = TreeIso> + '_> {
    let idx = AutIndex::new(t, |_| None);
    let total = checked_total(&idx.order, cap)?;
    Ok((0..total).map(move |k| idx.nth(t, k)))
}

fn checked_total(order: &BigUint, cap: u64) -> Result<u64> {
    match order.to_u64() {
        Some(n) if n <= cap => Ok(n),
        _ => Err(Error::AutCapExceeded {
            order: order.to_string(),
            cap,
        }),
    }
}

/// Elements of `Aut*(Γ)`, each lifted to a full automorphism of `Γ` (leaf
/// children are matched in index order). Two lifts of the same element agree
/// on `Γ*`.
#[derive(Clone, Debug)]
pub struct AutStar {
    tree: RootedTree,
    star: RootedTree,
    star_to_full: Vec<usize>,
    index: AutIndex,
}

impl AutStar {
    pub fn new(t: &RootedTree) -> Self {
        let (star, star_to_full) = t.star();
        let labels: Vec<usize> = star_to_full.iter().map(|&v| t.leaf_children(v)).collect();
        let index = AutIndex::new(&star, |v| Some(labels[v]));
        Self {
            tree: t.clone(),
            star,
            star_to_full,
            index,
        }
    }

    pub fn order(&self) -> &BigUint {
        &self.index.order
    }

    pub fn order_capped(&self, cap: u64) -> Result<u64> {
        checked_total(&self.index.order, cap)
    }

    pub fn element(&self, k: u64) -> TreeIso {
        let on_star = self.index.nth(&self.star, k);
        self.lift(&on_star)
    }

    fn lift(&self, on_star: &TreeIso) -> TreeIso {
        let t = &self.tree;
        let mut map = vec![usize::MAX; t.len()];
        for (sv, &v) in self.star_to_full.iter().enumerate() {
            let w = self.star_to_full[on_star.apply(sv)];
            map[v] = w;
            let src: Vec<usize> = t
                .children(v)
                .iter()
                .copied()
                .filter(|&c| t.is_leaf(c))
                .collect();
            let dst: Vec<usize> = t
                .children(w)
                .iter()
                .copied()
                .filter(|&c| t.is_leaf(c))
                .collect();
            for (a, b) in src.into_iter().zip(dst) {
                map[a] = b;
            }
        }
        TreeIso { map }
    }

    pub fn iter(&self, cap: u64) -> Result<impl Iterator<Item = TreeIso> + '_> {
        let total = self.order_capped(cap)?;
        Ok((0..total).map(move |k| self.element(k)))
    }
}

/// Reads `GDF_MAX_AUT`, falling back to [`DEFAULT_AUT_CAP`].
pub fn aut_cap_from_env() -> u64 {
    std::env::var("GDF_MAX_AUT")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_AUT_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BUSH_0212: &str = "[[[[]]],[[[]]],[[]],[],[]]";
    const SPRING_00312: &str = "[[[[[],[]]]],[[[]]],[[]],[[]],[[]]]";
    const BUSH_00320: &str = "[[[[]]],[[[]]],[[]],[[]],[[]]]";
    const SPRING_012: &str = "[[[],[]],[]]";
    const BUSH_012: &str = "[[[]],[[]],[]]";

    fn t(s: &str) -> RootedTree {
        RootedTree::from_nested(s).unwrap()
    }

    #[test]
    fn heights() {
        assert_eq!(RootedTree::single_vertex().height(), 0);
        assert_eq!(t(BUSH_0212).height(), 3);
        assert_eq!(t(SPRING_00312).height(), 4);
    }

    #[test]
    fn types_of_pictured_trees() {
        assert_eq!(t(BUSH_0212).tree_type().to_string(), "(0,2,1,2)");
        assert_eq!(t(SPRING_00312).tree_type().to_string(), "(0,0,3,1,2)");
        assert_eq!(t(SPRING_012).tree_type().to_string(), "(0,1,2)");
        assert_eq!(t(BUSH_012).tree_type().to_string(), "(0,1,2)");
        assert_eq!(RootedTree::chain(4).tree_type().counts(), &[0, 0, 0, 0, 1]);
        assert_eq!(RootedTree::single_vertex().tree_type().counts(), &[1]);
    }

    #[test]
    fn bush_predicates() {
        assert!(t(BUSH_0212).is_bush());
        assert!(!t(SPRING_00312).is_bush());
        assert!(RootedTree::single_vertex().is_bush());
        assert!(t(SPRING_00312).is_spring_bush().unwrap());
        assert!(t(SPRING_012).is_spring_bush().unwrap());
        assert!(t(BUSH_0212).is_spring_bush().unwrap());
        assert!(RootedTree::single_vertex().is_spring_bush().is_err());
        // the root's child carries a non-chain subtree below the top level
        assert!(!t("[[[[]],[[]]]]").is_spring_bush().unwrap());
    }

    #[test]
    fn truncation() {
        let tr = t(SPRING_00312).truncate(3);
        assert!(tree_iso(&tr, &t(BUSH_00320)).is_some());
        assert_eq!(t(BUSH_0212).truncate(0).len(), 1);
        assert_eq!(t(BUSH_0212).truncate(2).tree_type().counts(), &[0, 2, 3]);
        assert_eq!(t(BUSH_0212).truncate(10), t(BUSH_0212));
    }

    #[test]
    fn normal_form_constructions() {
        let b = bush_of_type(&"(0,2,1,2)".parse().unwrap()).unwrap();
        assert!(tree_iso(&b, &t(BUSH_0212)).is_some());
        assert_eq!(bush_of_type(&"(1)".parse().unwrap()).unwrap().len(), 1);
        let b = bush_of_type(&"(0,1,2)".parse().unwrap()).unwrap();
        assert!(tree_iso(&b, &t(BUSH_012)).is_some());
        assert!(bush_of_type(&TreeType::new(vec![1, 1]).unwrap()).is_err());

        let g = gizatullin_tree(&"(0,0,1)".parse().unwrap()).unwrap();
        assert!(tree_iso(&g, &RootedTree::chain(2)).is_some());
        let g = gizatullin_tree(&"(0,2,1,2)".parse().unwrap()).unwrap();
        assert_eq!(g.tree_type().to_string(), "(0,2,1,2)");
        assert_eq!(g.leaf_children(0), 2);
        assert_eq!(g.leaf_children(1), 1);
        assert_eq!(g.leaf_children(2), 2);
        let g = gizatullin_tree(&"(0,1,2)".parse().unwrap()).unwrap();
        assert_eq!((g.leaf_children(0), g.leaf_children(1)), (1, 2));
        assert!(gizatullin_tree(&"(1)".parse().unwrap()).is_err());
    }

    #[test]
    fn type_validation() {
        assert!(TreeType::new(vec![]).is_err());
        assert!(TreeType::new(vec![0]).is_err());
        assert!(TreeType::new(vec![0, 1, 0]).is_err());
        assert!("(0,2,1,2)".parse::<TreeType>().is_ok());
        assert!("[0,1]".parse::<TreeType>().is_ok());
    }

    #[test]
    fn isomorphism() {
        let a = t(BUSH_0212);
        let id = tree_iso(&a, &a).unwrap();
        assert!(id.is_valid(&a, &a));
        assert!(tree_iso(&t(SPRING_012), &t(BUSH_012)).is_none());
        let permuted = t("[[],[[]],[[[]]],[],[[[]]]]");
        let iso = tree_iso(&a, &permuted).unwrap();
        assert!(iso.is_valid(&a, &permuted));
        assert!(iso.inverse().is_valid(&permuted, &a));
    }

    #[test]
    fn automorphism_orders() {
        let g = aut_group(&RootedTree::chain(3));
        assert_eq!(g.order, BigUint::one());
        assert_eq!(g.star_order, BigUint::one());

        let g = aut_group(&t("[[[]],[[]]]"));
        assert_eq!(g.order, BigUint::from(2u32));
        assert_eq!(g.star_order, BigUint::from(2u32));

        let a = t(BUSH_0212);
        let g = aut_group(&a);
        assert_eq!(g.order, BigUint::from(4u32));
        assert_eq!(g.kernel_order, BigUint::from(2u32));
        assert_eq!(g.star_order, BigUint::from(2u32));
        assert_eq!(AutStar::new(&a).order(), &g.star_order);
        for gen in &g.generators {
            assert!(gen.is_valid(&a, &a));
        }
        let all: Vec<TreeIso> = aut_elements(&a, 100).unwrap().collect();
        assert_eq!(all.len(), 4);
        let distinct: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), 4);
        assert!(all.iter().all(|x| x.is_valid(&a, &a)));
        assert!(aut_elements(&a, 3).is_err());
    }

    #[test]
    fn leaf_levels() {
        assert_eq!(t(BUSH_0212).leaves_with_levels(), vec![1, 1, 2, 3, 3]);
        assert_eq!(RootedTree::chain(5).leaves_with_levels(), vec![5]);
        assert_eq!(t(SPRING_012).leaves_with_levels(), vec![1, 2, 2]);
        assert_eq!(RootedTree::single_vertex().leaves_with_levels(), vec![0]);
    }

    #[test]
    fn serialization_forms() {
        let a = t(SPRING_00312);
        assert_eq!(a.to_nested(), SPRING_00312);
        let j = a.to_adjacency_json();
        let b = RootedTree::from_adjacency_json(&j).unwrap();
        assert_eq!(b.to_adjacency_json(), j);
        assert!(tree_iso(&a, &b).is_some());
        assert!(RootedTree::from_nested("[[],").is_err());
        assert!(RootedTree::from_nested("[]]").is_err());
        let cyc = serde_json::json!({"parent": {"a": "b", "b": "a", "r": null}});
        assert!(RootedTree::from_adjacency_json(&cyc).is_err());
        let two_roots = serde_json::json!({"parent": {"a": null, "b": null}});
        assert!(RootedTree::from_adjacency_json(&two_roots).is_err());
    }

    #[test]
    fn stretching_inserts_chain_below_root() {
        let a = t(BUSH_0212);
        let s = a.stretched(2);
        assert_eq!(s.leaves_with_levels(), vec![3, 3, 4, 5, 5]);
        assert_eq!(s.len(), a.len() + 2);
        let single = RootedTree::single_vertex().stretched(1);
        assert_eq!(single.leaves_with_levels(), vec![1]);
    }
}
