//! The labeled cell poset supporting the parking resolution: one k-cell
//! per sink-rooted (k+2)-partition, labeled with its divisor monomial,
//! ordered by iterated contraction, with incidence signs taken from the
//! resolution differentials.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::partition::AcyclicPartition;
use crate::poly::{Assignment, Monomial, PolyMatrix};
use crate::resolution::{build_parking, FreeComplex};
use crate::verify::homology_dims;

/// Address of a cell: (dimension, index within that dimension).
pub type CellId = (usize, usize);

pub struct CWPoset {
    n: usize,
    /// cells[d] lists the (d+2)-partitions, in the canonical basis order.
    cells: Vec<Vec<AcyclicPartition>>,
    labels: Vec<Vec<Monomial>>,
    /// incidence[d]: signed matrix from dimension d cells to dimension
    /// d-1 cells; incidence[0] is the augmentation row onto the empty cell.
    incidence: Vec<PolyMatrix>,
    /// covers[d][i] = indices of (d-1)-cells covered by cell (d, i).
    covers: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CWSummary {
    pub cells_per_dim: Vec<usize>,
    pub label_lcm_ok: bool,
    pub acyclicity_ok: bool,
    pub boundary_spheres_ok: bool,
    pub facet_counts_simplicial: bool,
}

/// Builds the poset from the parking resolution of `g`.
pub fn build_part(g: &Multigraph) -> Result<CWPoset> {
    if g.n() < 2 {
        return Err(Error::PartitionSize(2, g.n()));
    }
    let c = build_parking(g)?;
    Ok(build_part_from_complex(g, &c))
}

pub fn build_part_from_complex(g: &Multigraph, c: &FreeComplex) -> CWPoset {
    let n = g.n();
    let dims = c.length() - 1; // cells of dimension 0..n-2
    let mut cells = Vec::with_capacity(dims);
    let mut labels = Vec::with_capacity(dims);
    for k in 1..c.length() {
        let level: Vec<AcyclicPartition> = c.basis(k).iter().map(|b| b.rep.clone()).collect();
        let lab: Vec<Monomial> = c
            .basis(k)
            .iter()
            .map(|b| Monomial::from_divisor(&b.divisor).expect("nonnegative"))
            .collect();
        cells.push(level);
        labels.push(lab);
    }
    // incidence: all-variables-to-one specialization of the differentials
    let ones: Vec<Assignment> = (0..n)
        .map(|_| Assignment::Value(crate::poly::big(1)))
        .collect();
    let incidence: Vec<PolyMatrix> = (1..c.length())
        .map(|k| c.differential(k).substitute(&ones, &Assignment::Keep))
        .collect();
    let mut covers: Vec<Vec<Vec<usize>>> = Vec::with_capacity(dims);
    for (d, m) in incidence.iter().enumerate().skip(1) {
        let _ = d;
        let mut per_cell: Vec<Vec<usize>> = vec![Vec::new(); m.cols];
        for (&(r, cc), _) in m.entries() {
            per_cell[cc].push(r);
        }
        covers.push(per_cell);
    }
    // dimension-0 cells cover only the empty cell; align indices so
    // covers[d] corresponds to cells[d]
    covers.insert(0, vec![Vec::new(); cells[0].len()]);
    CWPoset {
        n,
        cells,
        labels,
        incidence,
        covers,
    }
}

impl CWPoset {
    pub fn dims(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self, d: usize) -> &[AcyclicPartition] {
        &self.cells[d]
    }

    pub fn label(&self, id: CellId) -> &Monomial {
        &self.labels[id.0][id.1]
    }

    pub fn cells_per_dim(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.len()).collect()
    }

    /// Facets (codimension-one faces) of a cell.
    pub fn facets(&self, id: CellId) -> &[usize] {
        &self.covers[id.0][id.1]
    }

    /// The strictly-lower order ideal of a cell: all cells reachable by
    /// repeated facet steps.
    pub fn lower_ideal(&self, id: CellId) -> Vec<BTreeSet<usize>> {
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); id.0];
        if id.0 == 0 {
            return out;
        }
        let mut frontier: Vec<CellId> = self.facets(id).iter().map(|&i| (id.0 - 1, i)).collect();
        for &(d, i) in &frontier {
            out[d].insert(i);
        }
        while let Some((d, i)) = frontier.pop() {
            if d == 0 {
                continue;
            }
            for &f in self.facets((d, i)) {
                if out[d - 1].insert(f) {
                    frontier.push((d - 1, f));
                }
            }
        }
        out
    }

    /// Every cell of dimension >= 1 is labeled by the least common
    /// multiple of its facet labels.
    pub fn check_label_lcm(&self) -> bool {
        for d in 1..self.dims() {
            for (i, label) in self.labels[d].iter().enumerate() {
                let mut lcm = Monomial::one(self.n);
                for &f in self.facets((d, i)) {
                    lcm = lcm.lcm(&self.labels[d - 1][f]);
                }
                if &lcm != label {
                    return false;
                }
            }
        }
        true
    }

    /// Homology of the subcomplex of cells whose labels divide the given
    /// monomial, augmented over the empty cell. Returns None for the empty
    /// subcomplex.
    fn restricted_homology(&self, bound: &Monomial) -> Option<Vec<usize>> {
        let included: Vec<Vec<usize>> = self
            .labels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.divides(bound))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        if included[0].is_empty() {
            // a nonempty subcomplex always contains a vertex
            debug_assert!(included.iter().all(|l| l.is_empty()));
            return None;
        }
        // chain positions: 0 = empty cell, d+1 = dimension-d cells
        let mut dims: Vec<usize> = vec![1];
        dims.extend(included.iter().map(|l| l.len()));
        let mut maps: Vec<Vec<Vec<BigRational>>> = Vec::new();
        for (d, inc) in self.incidence.iter().enumerate() {
            let rows: Vec<usize> = if d == 0 {
                vec![0]
            } else {
                included[d - 1].clone()
            };
            let cols = &included[d];
            let row_pos: HashMap<usize, usize> =
                rows.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let mut m = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
            for (cp, &cc) in cols.iter().enumerate() {
                for (&(r, c2), p) in inc.entries() {
                    if c2 != cc {
                        continue;
                    }
                    let target_row = if d == 0 { 0 } else { r };
                    if let Some(&rp) = row_pos.get(&target_row) {
                        m[rp][cp] = p.constant_value().expect("specialized entry");
                    }
                }
            }
            maps.push(m);
        }
        Some(homology_dims(&dims, &maps))
    }

    /// For every join of cell labels, the subcomplex of cells dividing it
    /// must have vanishing reduced homology.
    pub fn check_cellular_acyclicity(&self) -> AcyclicityReport {
        // joins are generated by the vertex labels
        let mut joins: BTreeSet<Monomial> = self.labels[0].iter().cloned().collect();
        loop {
            let mut added = false;
            let snapshot: Vec<Monomial> = joins.iter().cloned().collect();
            for a in &snapshot {
                for b in &self.labels[0] {
                    if joins.insert(a.lcm(b)) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let mut failures = Vec::new();
        let mut checked = 0usize;
        let mut memo: HashMap<Vec<Vec<usize>>, bool> = HashMap::new();
        for b in &joins {
            let included: Vec<Vec<usize>> = self
                .labels
                .iter()
                .map(|level| {
                    level
                        .iter()
                        .enumerate()
                        .filter(|(_, l)| l.divides(b))
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect();
            let ok = match memo.get(&included) {
                Some(&ok) => ok,
                None => {
                    let ok = match self.restricted_homology(b) {
                        None => true,
                        Some(h) => h.iter().all(|&x| x == 0),
                    };
                    memo.insert(included, ok);
                    ok
                }
            };
            checked += 1;
            if !ok {
                failures.push(b.to_string());
            }
        }
        AcyclicityReport {
            joins_checked: checked,
            failures,
        }
    }

    /// The boundary of every k-cell (k >= 1) must have the reduced
    /// homology of a (k-1)-sphere.
    pub fn check_boundary_spheres(&self) -> SphereReport {
        let mut failures = Vec::new();
        let mut checked = 0usize;
        for d in 1..self.dims() {
            for i in 0..self.cells[d].len() {
                checked += 1;
                let ideal = self.lower_ideal((d, i));
                // augmented chain complex of the ideal
                let mut dims: Vec<usize> = vec![1];
                dims.extend(ideal.iter().map(|l| l.len()));
                let mut maps: Vec<Vec<Vec<BigRational>>> = Vec::new();
                for (dd, inc) in self.incidence.iter().enumerate().take(d) {
                    let rows: Vec<usize> = if dd == 0 {
                        vec![0]
                    } else {
                        ideal[dd - 1].iter().copied().collect()
                    };
                    let cols: Vec<usize> = ideal[dd].iter().copied().collect();
                    let row_pos: HashMap<usize, usize> =
                        rows.iter().enumerate().map(|(p, &x)| (x, p)).collect();
                    let col_set: BTreeSet<usize> = cols.iter().copied().collect();
                    let mut m = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
                    let col_pos: HashMap<usize, usize> =
                        cols.iter().enumerate().map(|(p, &x)| (x, p)).collect();
                    for (&(r, cc), p) in inc.entries() {
                        if !col_set.contains(&cc) {
                            continue;
                        }
                        let target = if dd == 0 { 0 } else { r };
                        if let Some(&rp) = row_pos.get(&target) {
                            m[rp][col_pos[&cc]] = p.constant_value().expect("specialized entry");
                        }
                    }
                    maps.push(m);
                }
                let h = homology_dims(&dims, &maps);
                // a (d-1)-sphere: one class at position d, nothing else
                let ok = h
                    .iter()
                    .enumerate()
                    .all(|(pos, &x)| if pos == d { x == 1 } else { x == 0 });
                if !ok {
                    failures.push(format!("cell ({d},{i}): homology {h:?}"));
                }
            }
        }
        SphereReport { checked, failures }
    }

    /// For saturated graphs the poset is simplicial: every k-cell has
    /// exactly k+1 facets.
    pub fn facet_counts_simplicial(&self) -> bool {
        (1..self.dims()).all(|d| {
            self.cells[d]
                .iter()
                .enumerate()
                .all(|(i, _)| self.facets((d, i)).len() == d + 1)
        })
    }

    pub fn summary(&self, saturated: bool) -> CWSummary {
        let acyclicity = self.check_cellular_acyclicity();
        let spheres = self.check_boundary_spheres();
        CWSummary {
            cells_per_dim: self.cells_per_dim(),
            label_lcm_ok: self.check_label_lcm(),
            acyclicity_ok: acyclicity.failures.is_empty(),
            boundary_spheres_ok: spheres.failures.is_empty(),
            facet_counts_simplicial: !saturated || self.facet_counts_simplicial(),
        }
    }

    /// The finest sink-rooted partition coarsening both cells: join the two
    /// block partitions, contract every edge on which the orientations
    /// disagree, then contract directed cycles until acyclic. Returns None
    /// when the result collapses to the one-block partition.
    pub fn meet(&self, a: &AcyclicPartition, b: &AcyclicPartition) -> Option<AcyclicPartition> {
        let n = self.n;
        let mut parent: Vec<usize> = (0..n).collect();
        for part in [a, b] {
            for block in part.blocks() {
                for w in &block[1..] {
                    let (x, y) = (uf(&mut parent, block[0]), uf(&mut parent, *w));
                    if x != y {
                        parent[x] = y;
                    }
                }
            }
        }
        loop {
            let group_of: Vec<usize> = (0..n).map(|v| uf(&mut parent, v)).collect();
            // directions between groups, from both orientations
            let mut dir: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            let mut conflict: Option<(usize, usize)> = None;
            'scan: for part in [a, b] {
                for e in part.edges() {
                    let t = group_of[part.blocks()[e.tail][0]];
                    let h = group_of[part.blocks()[e.head][0]];
                    if t == h {
                        continue;
                    }
                    let key = (t.min(h), t.max(h));
                    match dir.get(&key) {
                        Some(&d) if d != (t, h) => {
                            conflict = Some(key);
                            break 'scan;
                        }
                        _ => {
                            dir.insert(key, (t, h));
                        }
                    }
                }
            }
            if let Some((x, y)) = conflict {
                let (rx, ry) = (uf(&mut parent, x), uf(&mut parent, y));
                parent[rx] = ry;
                continue;
            }
            let edges: Vec<(usize, usize)> = dir.values().copied().collect();
            if let Some(cycle) = directed_cycle(&edges) {
                let first = cycle[0];
                for &v in &cycle[1..] {
                    let (rx, ry) = (uf(&mut parent, first), uf(&mut parent, v));
                    if rx != ry {
                        parent[rx] = ry;
                    }
                }
                continue;
            }
            // stable: assemble the result
            let mut blocks_map: HashMap<usize, Vec<usize>> = HashMap::new();
            for v in 0..n {
                blocks_map.entry(uf(&mut parent, v)).or_default().push(v);
            }
            if blocks_map.len() == 1 {
                return None;
            }
            let mut blocks: Vec<(usize, Vec<usize>)> = blocks_map
                .into_iter()
                .map(|(root, mut vs)| {
                    vs.sort_unstable();
                    (root, vs)
                })
                .collect();
            blocks.sort_by(|x, y| x.1.cmp(&y.1));
            let index_of_root: HashMap<usize, usize> = blocks
                .iter()
                .enumerate()
                .map(|(i, (root, _))| (*root, i))
                .collect();
            let directed: Vec<crate::partition::DirectedQuotientEdge> = edges
                .iter()
                .map(|&(t, h)| {
                    crate::partition::DirectedQuotientEdge::new(
                        index_of_root[&t],
                        index_of_root[&h],
                    )
                })
                .collect();
            let result = AcyclicPartition::assemble(
                blocks.into_iter().map(|(_, vs)| vs).collect(),
                directed,
            );
            return Some(result);
        }
    }
}

fn uf(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let nxt = parent[cur];
        parent[cur] = root;
        cur = nxt;
    }
    root
}

/// One directed cycle of the digraph, as a vertex list, if any exists.
fn directed_cycle(edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let verts: BTreeSet<usize> = edges.iter().flat_map(|&(t, h)| [t, h]).collect();
    for &start in &verts {
        // DFS looking for a path back to start
        let mut stack = vec![(start, vec![start])];
        let mut seen = BTreeSet::new();
        while let Some((v, path)) = stack.pop() {
            for &(t, h) in edges {
                if t != v {
                    continue;
                }
                if h == start {
                    return Some(path);
                }
                if seen.insert(h) {
                    let mut next = path.clone();
                    next.push(h);
                    stack.push((h, next));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct CellJson {
    pub dim: usize,
    pub index: usize,
    pub blocks: Vec<Vec<usize>>,
    pub orientation: Vec<[usize; 2]>,
    pub label: String,
    /// (facet index, incidence sign) pairs into dimension dim-1.
    pub facets: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CWPosetJson {
    pub cells_per_dim: Vec<usize>,
    pub cells: Vec<CellJson>,
}

impl CWPoset {
    /// The labeled face poset with signed incidences, for external tools.
    pub fn to_json(&self) -> CWPosetJson {
        let mut cells = Vec::new();
        for (d, level) in self.cells.iter().enumerate() {
            for (i, cell) in level.iter().enumerate() {
                let facets: Vec<(usize, i64)> = if d == 0 {
                    Vec::new()
                } else {
                    self.facets((d, i))
                        .iter()
                        .map(|&f| {
                            let sign = self.incidence[d]
                                .get(f, i)
                                .and_then(|p| p.constant_value())
                                .map(|c| {
                                    if c > num_rational::BigRational::zero() {
                                        1
                                    } else {
                                        -1
                                    }
                                })
                                .unwrap_or(0);
                            (f, sign)
                        })
                        .collect()
                };
                cells.push(CellJson {
                    dim: d,
                    index: i,
                    blocks: cell
                        .blocks()
                        .iter()
                        .map(|b| b.iter().map(|v| v + 1).collect())
                        .collect(),
                    orientation: cell.edges().iter().map(|e| [e.tail, e.head]).collect(),
                    label: self.labels[d][i].to_string(),
                    facets,
                });
            }
        }
        CWPosetJson {
            cells_per_dim: self.cells_per_dim(),
            cells,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcyclicityReport {
    pub joins_checked: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kite() -> Multigraph {
        Multigraph::parse("1 2 1\n1 3 1\n1 4 1\n2 4 1\n3 4 1\n", None).unwrap()
    }

    fn k4() -> Multigraph {
        Multigraph::parse("1 2 1\n1 3 1\n1 4 1\n2 3 1\n2 4 1\n3 4 1\n", None).unwrap()
    }

    #[test]
    fn kite_cell_counts() {
        let p = build_part(&kite()).unwrap();
        assert_eq!(p.cells_per_dim(), vec![6, 9, 4]);
    }

    #[test]
    fn path_is_simplex_boundary() {
        let g = Multigraph::parse("1 2 1\n2 3 1\n", None).unwrap();
        let p = build_part(&g).unwrap();
        assert_eq!(p.cells_per_dim(), vec![2, 1]);
        assert!(p.check_label_lcm());
        assert!(p.check_boundary_spheres().failures.is_empty());
    }

    #[test]
    fn kite_checks_pass() {
        let p = build_part(&kite()).unwrap();
        assert!(p.check_label_lcm());
        let acyc = p.check_cellular_acyclicity();
        assert!(acyc.failures.is_empty(), "{acyc:?}");
        let spheres = p.check_boundary_spheres();
        assert!(spheres.failures.is_empty(), "{spheres:?}");
    }

    #[test]
    fn k4_is_simplicial() {
        let p = build_part(&k4()).unwrap();
        assert!(p.facet_counts_simplicial());
        assert!(p.check_label_lcm());
        assert!(p.check_boundary_spheres().failures.is_empty());
    }

    #[test]
    fn label_mutation_detected() {
        let g = kite();
        let mut p = build_part(&g).unwrap();
        p.labels[1][0] = Monomial::one(4);
        assert!(!p.check_label_lcm());
    }

    #[test]
    fn chain_with_labels_erased_matches_complex() {
        let g = kite();
        let c = build_parking(&g).unwrap();
        let p = build_part_from_complex(&g, &c);
        for (d, inc) in p.incidence.iter().enumerate().skip(1) {
            let orig = c.differential(d + 1);
            for (&(r, cc), v) in inc.entries() {
                let poly = orig.get(r, cc).unwrap();
                // same sign as the monomial entry's coefficient
                let coeff = poly.terms().next().unwrap().1.clone();
                assert_eq!(v.constant_value().unwrap(), coeff);
            }
        }
    }

    #[test]
    fn restriction_below_all_labels_is_vacuous() {
        let p = build_part(&kite()).unwrap();
        assert!(p.restricted_homology(&Monomial::one(4)).is_none());
    }

    #[test]
    fn json_export_lists_all_cells() {
        let p = build_part(&kite()).unwrap();
        let j = p.to_json();
        assert_eq!(j.cells.len(), 19);
        assert_eq!(j.cells_per_dim, vec![6, 9, 4]);
        // every 1-cell has two signed facets
        for cell in j.cells.iter().filter(|c| c.dim == 1) {
            assert_eq!(cell.facets.len(), 2);
            assert!(cell.facets.iter().all(|&(_, s)| s == 1 || s == -1));
        }
    }

    /// For each pair of facets of a common cell, the meet must be the
    /// unique maximal common element of their strictly-lower ideals.
    fn check_meets(g: &Multigraph) {
        let p = build_part(g).unwrap();
        for d in 1..p.dims() {
            for i in 0..p.cells[d].len() {
                let facets = p.facets((d, i)).to_vec();
                for (ai, &a) in facets.iter().enumerate() {
                    for &b in &facets[ai + 1..] {
                        let ca = &p.cells[d - 1][a];
                        let cb = &p.cells[d - 1][b];
                        let meet = p.meet(ca, cb);
                        let ia = p.lower_ideal((d - 1, a));
                        let ib = p.lower_ideal((d - 1, b));
                        let mut common: Vec<(usize, usize)> = Vec::new();
                        for dd in (0..d.saturating_sub(1)).rev() {
                            let level: Vec<(usize, usize)> =
                                ia[dd].intersection(&ib[dd]).map(|&x| (dd, x)).collect();
                            if !level.is_empty() {
                                common = level;
                                break;
                            }
                        }
                        match (&meet, common.as_slice()) {
                            (Some(m), [(dd, x)]) => assert_eq!(m, &p.cells[*dd][*x]),
                            (None, []) => {}
                            _ => panic!("meet {meet:?} vs common {common:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn meets_agree_with_common_faces() {
        check_meets(&kite());
        check_meets(&k4());
    }

    #[test]
    fn meets_agree_on_corpus() {
        for g in crate::corpus::connected_simple_graphs_up_to(5) {
            if g.n() >= 2 {
                check_meets(&g);
            }
        }
        for g in crate::corpus::random_multigraphs(3, 10, 5, 3) {
            check_meets(&g);
        }
    }
}
