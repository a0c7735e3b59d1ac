//! Query hypergraphs, fractional edge covers, elimination steps, widths and
//! tree decompositions.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{FaqError, Result};
use crate::factor::VarId;
use crate::lp::solve_cover;

/// Identity of one edge occurrence in a multi-hypergraph.
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeWeight {
    /// Symbolic size `N`; covers then measure `ρ*`.
    Uniform,
    /// `log₂` of the relation size.
    Log2(BigRational),
}

impl EdgeWeight {
    fn value(&self) -> BigRational {
        match self {
            EdgeWeight::Uniform => BigRational::one(),
            EdgeWeight::Log2(w) => w.clone(),
        }
    }

    /// Log weight of a relation with `size` tuples, rounded up to 1/1024.
    pub fn from_size(size: usize) -> EdgeWeight {
        let bits = (size.max(1) as f64).log2();
        let scaled = (bits * 1024.0).ceil() as i64;
        EdgeWeight::Log2(BigRational::new(scaled.into(), 1024.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    /// Sorted vertex list; empty for scalar edges created by elimination.
    pub vars: Vec<VarId>,
    pub weight: EdgeWeight,
}

impl Edge {
    pub fn contains(&self, v: VarId) -> bool {
        self.vars.binary_search(&v).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: Vec<VarId>,
    edges: Vec<Edge>,
    next_id: EdgeId,
}

impl Hypergraph {
    /// Uniform-weight hypergraph with edge ids `0..edges.len()`.
    pub fn new(vertices: impl IntoIterator<Item = VarId>, edges: Vec<Vec<VarId>>) -> Result<Self> {
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(id, vars)| Edge {
                id,
                vars,
                weight: EdgeWeight::Uniform,
            })
            .collect();
        Hypergraph::from_edges(vertices, edges)
    }

    pub fn from_edges(vertices: impl IntoIterator<Item = VarId>, edges: Vec<Edge>) -> Result<Self> {
        let vertices: BTreeSet<VarId> = vertices.into_iter().collect();
        let mut normalized = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.vars.sort_unstable();
            e.vars.dedup();
            if e.vars.is_empty() {
                return Err(FaqError::InvalidQuery(format!("edge #{} is empty", e.id)));
            }
            if let Some(v) = e.vars.iter().find(|v| !vertices.contains(v)) {
                return Err(FaqError::InvalidQuery(format!(
                    "edge #{} mentions unknown vertex #{v}",
                    e.id
                )));
            }
            normalized.push(e);
        }
        let next_id = normalized.iter().map(|e| e.id + 1).max().unwrap_or(0);
        Ok(Hypergraph {
            vertices: vertices.into_iter().collect(),
            edges: normalized,
            next_id,
        })
    }

    pub fn vertices(&self) -> &[VarId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn incident(&self, v: VarId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.contains(v))
    }

    pub fn set_weight(&mut self, id: EdgeId, weight: EdgeWeight) {
        if let Some(e) = self.edges.iter_mut().find(|e| e.id == id) {
            e.weight = weight;
        }
    }

    fn fresh_id(&mut self) -> EdgeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalEdgeCover {
    /// `λ_F` for every edge, in the hypergraph's edge order.
    pub lambda: Vec<(EdgeId, BigRational)>,
    pub objective: BigRational,
}

/// Optimal fractional edge cover of `restrict_to` (or all vertices) under
/// the edges' weights. Uniform weights yield `ρ*`.
pub fn fractional_edge_cover(
    h: &Hypergraph,
    restrict_to: Option<&[VarId]>,
) -> Result<FractionalEdgeCover> {
    cover(h, restrict_to, false)
}

/// `ρ*` of the hypergraph, ignoring stored weights.
pub fn rho_star(h: &Hypergraph) -> Result<BigRational> {
    Ok(cover(h, None, true)?.objective)
}

fn cover(h: &Hypergraph, restrict_to: Option<&[VarId]>, uniform: bool) -> Result<FractionalEdgeCover> {
    let vertices: Vec<VarId> = match restrict_to {
        Some(vs) => {
            let mut vs = vs.to_vec();
            vs.sort_unstable();
            vs.dedup();
            vs
        }
        None => h.vertices.clone(),
    };
    let index: HashMap<VarId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rows: Vec<Vec<usize>> = h
        .edges
        .iter()
        .map(|e| e.vars.iter().filter_map(|v| index.get(v).copied()).collect())
        .collect();
    let weights: Vec<BigRational> = h
        .edges
        .iter()
        .map(|e| if uniform { BigRational::one() } else { e.weight.value() })
        .collect();
    let solution =
        solve_cover(vertices.len(), &rows, &weights).map_err(|i| FaqError::Uncoverable(vertices[i]))?;
    Ok(FractionalEdgeCover {
        lambda: h.edges.iter().map(|e| e.id).zip(solution.lambda).collect(),
        objective: solution.objective,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepMode {
    Semiring,
    Product,
}

/// Which indicator projections a semiring step joins in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ProjectionPolicy {
    /// Every overlapping non-boundary edge that is not a subset of `U`.
    Always,
    /// As `Always`, except when the boundary is a single edge: that step is
    /// a plain marginalization of one factor.
    #[default]
    MultiFactor,
    Never,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub source: EdgeId,
    pub vars: Vec<VarId>,
    /// Id of the projection edge inside the subquery hypergraph.
    pub edge: EdgeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationStep {
    pub var: VarId,
    pub mode: StepMode,
    /// `U`: union of the boundary edges.
    pub union: Vec<VarId>,
    /// `∂(var)`.
    pub boundary: Vec<EdgeId>,
    /// Non-boundary edges contained in `U`, joined whole and removed.
    pub absorbed: Vec<EdgeId>,
    pub projections: Vec<Projection>,
    /// Subquery hypergraph on `U`; empty for product steps.
    pub subquery: Hypergraph,
    pub successor: Hypergraph,
    /// The `U − {var}` edge added by a semiring step.
    pub new_edge: Option<EdgeId>,
}

pub fn eliminate_step(h: &Hypergraph, var: VarId, mode: StepMode) -> Result<EliminationStep> {
    eliminate_step_with(h, var, mode, ProjectionPolicy::default())
}

pub fn eliminate_step_with(
    h: &Hypergraph,
    var: VarId,
    mode: StepMode,
    policy: ProjectionPolicy,
) -> Result<EliminationStep> {
    if h.vertices.binary_search(&var).is_err() {
        return Err(FaqError::InvalidOrdering(format!("variable #{var} is not a vertex")));
    }
    let boundary: Vec<EdgeId> = h.incident(var).map(|e| e.id).collect();
    let union: Vec<VarId> = {
        let mut u: BTreeSet<VarId> = h.incident(var).flat_map(|e| e.vars.iter().copied()).collect();
        u.insert(var);
        u.into_iter().collect()
    };
    let remaining_vertices = h.vertices.iter().copied().filter(|&v| v != var);

    if mode == StepMode::Product {
        let edges = h
            .edges
            .iter()
            .map(|e| Edge {
                id: e.id,
                vars: e.vars.iter().copied().filter(|&v| v != var).collect(),
                weight: e.weight.clone(),
            })
            .collect();
        let successor = Hypergraph {
            vertices: remaining_vertices.collect(),
            edges,
            next_id: h.next_id,
        };
        return Ok(EliminationStep {
            var,
            mode,
            union,
            boundary,
            absorbed: vec![],
            projections: vec![],
            subquery: Hypergraph { vertices: vec![], edges: vec![], next_id: 0 },
            successor,
            new_edge: None,
        });
    }

    let in_union = |v: &VarId| union.binary_search(v).is_ok();
    let project = match policy {
        ProjectionPolicy::Always => true,
        ProjectionPolicy::MultiFactor => boundary.len() > 1,
        ProjectionPolicy::Never => false,
    };
    let mut sub_edges: Vec<Edge> = h.edges.iter().filter(|e| e.contains(var)).cloned().collect();
    let mut absorbed = Vec::new();
    let mut projections = Vec::new();
    let mut local_id = h.next_id;
    for e in h.edges.iter().filter(|e| !e.contains(var) && !e.vars.is_empty()) {
        let inter: Vec<VarId> = e.vars.iter().copied().filter(in_union).collect();
        if inter.len() == e.vars.len() {
            absorbed.push(e.id);
            sub_edges.push(e.clone());
        } else if !inter.is_empty() && project {
            projections.push(Projection {
                source: e.id,
                vars: inter.clone(),
                edge: local_id,
            });
            sub_edges.push(Edge {
                id: local_id,
                vars: inter,
                weight: e.weight.clone(),
            });
            local_id += 1;
        }
    }
    let subquery = Hypergraph {
        vertices: union.clone(),
        edges: sub_edges,
        next_id: local_id,
    };

    let mut successor = Hypergraph {
        vertices: remaining_vertices.collect(),
        edges: h
            .edges
            .iter()
            .filter(|e| !e.contains(var) && !absorbed.contains(&e.id))
            .cloned()
            .collect(),
        next_id: local_id,
    };
    let new_id = successor.fresh_id();
    successor.edges.push(Edge {
        id: new_id,
        vars: union.iter().copied().filter(|&v| v != var).collect(),
        weight: EdgeWeight::Uniform,
    });
    Ok(EliminationStep {
        var,
        mode,
        union,
        boundary,
        absorbed,
        projections,
        subquery,
        successor,
        new_edge: Some(new_id),
    })
}

impl EliminationStep {
    /// `ρ*` (or the weighted cover objective) of the subquery; `None` for
    /// product steps, zero for an isolated variable.
    pub fn cover_objective(&self, uniform: bool) -> Result<Option<BigRational>> {
        if self.mode == StepMode::Product {
            return Ok(None);
        }
        if self.boundary.is_empty() {
            return Ok(Some(BigRational::zero()));
        }
        Ok(Some(cover(&self.subquery, None, uniform)?.objective))
    }
}

/// How subquery sizes are estimated while scoring an ordering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CostModel {
    /// Every relation has size `N`; scores are `ρ*`.
    #[default]
    Uniform,
    /// Edge weights are log-sizes; a new edge inherits its step's bound.
    DataAware,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWidth {
    pub var: VarId,
    pub mode: StepMode,
    pub union: Vec<VarId>,
    pub subquery_edges: Vec<Vec<VarId>>,
    pub rho: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthReport {
    pub steps: Vec<StepWidth>,
    pub width: BigRational,
}

/// Simulates elimination of `order` from its last entry down to the first;
/// `is_product[v]` marks variables under a product aggregate. The width is
/// the largest cover objective over the semiring steps.
pub fn width_of_ordering(
    h: &Hypergraph,
    order: &[VarId],
    is_product: &[bool],
    policy: ProjectionPolicy,
    cost: CostModel,
) -> Result<WidthReport> {
    let mut current = h.clone();
    let mut steps = Vec::with_capacity(order.len());
    let mut width = BigRational::zero();
    for &var in order.iter().rev() {
        let mode = if is_product.get(var).copied().unwrap_or(false) {
            StepMode::Product
        } else {
            StepMode::Semiring
        };
        let step = eliminate_step_with(&current, var, mode, policy)?;
        let rho = step.cover_objective(cost == CostModel::Uniform)?;
        if let Some(r) = &rho {
            if *r > width {
                width = r.clone();
            }
        }
        let mut successor = step.successor;
        if let (CostModel::DataAware, Some(id), Some(r)) = (cost, step.new_edge, &rho) {
            successor.set_weight(id, EdgeWeight::Log2(r.clone()));
        }
        steps.push(StepWidth {
            var,
            mode,
            union: step.union,
            subquery_edges: step.subquery.edges.iter().map(|e| e.vars.clone()).collect(),
            rho,
        });
        current = successor;
    }
    Ok(WidthReport { steps, width })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<VarId>>,
    pub tree_edges: Vec<(usize, usize)>,
    /// Fractional cover width of each bag under the hypergraph's edges.
    pub widths: Vec<BigRational>,
}

impl TreeDecomposition {
    pub fn width(&self) -> BigRational {
        self.widths.iter().cloned().max().unwrap_or_else(BigRational::zero)
    }
}

/// GYO construction: eliminating `v` makes `U_v` a bag whose children are
/// the bags that produced the edges it consumes. Bags contained in a
/// neighbour are merged away.
pub fn tree_decomposition_from_ordering(h: &Hypergraph, order: &[VarId]) -> Result<TreeDecomposition> {
    let listed: BTreeSet<VarId> = order.iter().copied().collect();
    if listed.len() != order.len() || listed.iter().ne(h.vertices.iter()) {
        return Err(FaqError::InvalidOrdering(
            "ordering must list every vertex exactly once".into(),
        ));
    }
    let mut current = h.clone();
    let mut producer: HashMap<EdgeId, usize> = HashMap::new();
    let mut bags: Vec<BTreeSet<VarId>> = Vec::new();
    let mut links: Vec<(usize, usize)> = Vec::new();
    for &var in order.iter().rev() {
        let step = eliminate_step_with(&current, var, StepMode::Semiring, ProjectionPolicy::Never)?;
        let bag = bags.len();
        bags.push(step.union.iter().copied().collect());
        for id in step.boundary.iter().chain(&step.absorbed) {
            if let Some(&child) = producer.get(id) {
                links.push((child, bag));
            }
        }
        if let Some(id) = step.new_edge {
            producer.insert(id, bag);
        }
        current = step.successor;
    }

    // contract edges between nested bags
    let mut alive = vec![true; bags.len()];
    loop {
        let nested = links.iter().enumerate().find_map(|(i, &(a, b))| {
            if bags[a].is_subset(&bags[b]) {
                Some((i, a, b))
            } else if bags[b].is_subset(&bags[a]) {
                Some((i, b, a))
            } else {
                None
            }
        });
        let Some((i, small, big)) = nested else { break };
        links.swap_remove(i);
        alive[small] = false;
        for link in links.iter_mut() {
            if link.0 == small {
                link.0 = big;
            }
            if link.1 == small {
                link.1 = big;
            }
        }
    }

    // join the forest into one tree
    let mut parent: Vec<usize> = (0..bags.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for &(a, b) in &links {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let live: Vec<usize> = (0..bags.len()).filter(|&i| alive[i]).collect();
    if let Some(&first) = live.first() {
        for &i in &live[1..] {
            let (ri, rf) = (find(&mut parent, i), find(&mut parent, first));
            if ri != rf {
                parent[ri] = rf;
                links.push((i, first));
            }
        }
    }

    let renumber: HashMap<usize, usize> = live.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let mut tree_edges: Vec<(usize, usize)> =
        links.iter().map(|&(a, b)| (renumber[&a], renumber[&b])).collect();
    tree_edges.sort_unstable();
    let bags: Vec<Vec<VarId>> = live.iter().map(|&i| bags[i].iter().copied().collect()).collect();
    let widths = bags
        .iter()
        .map(|bag| bag_width(h, bag))
        .collect::<Result<Vec<_>>>()?;
    let td = TreeDecomposition { bags, tree_edges, widths };
    match validate_tree_decomposition(&td, h) {
        TdCheck::Pass => Ok(td),
        bad => Err(FaqError::Internal(format!("tree decomposition invalid: {bad:?}"))),
    }
}

fn bag_width(h: &Hypergraph, bag: &[VarId]) -> Result<BigRational> {
    let coverable: Vec<VarId> = bag
        .iter()
        .copied()
        .filter(|&v| h.incident(v).next().is_some())
        .collect();
    Ok(cover(h, Some(&coverable), true)?.objective)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdCheck {
    Pass,
    NotATree,
    UncoveredVertex(VarId),
    UncoveredEdge(Vec<VarId>),
    RunningIntersection(VarId),
}

/// Checks that the bags form a tree, cover every vertex and edge, and that
/// the bags holding each vertex are connected.
pub fn validate_tree_decomposition(td: &TreeDecomposition, h: &Hypergraph) -> TdCheck {
    let n = td.bags.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &td.tree_edges {
        if a >= n || b >= n || a == b {
            return TdCheck::NotATree;
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    if n > 0 && (td.tree_edges.len() != n - 1 || reach(&adj, 0, |_| true).len() != n) {
        return TdCheck::NotATree;
    }
    let contains = |bag: usize, v: VarId| td.bags[bag].contains(&v);
    for &v in &h.vertices {
        if !(0..n).any(|b| contains(b, v)) {
            return TdCheck::UncoveredVertex(v);
        }
    }
    for e in &h.edges {
        if !(0..n).any(|b| e.vars.iter().all(|&v| contains(b, v))) {
            return TdCheck::UncoveredEdge(e.vars.clone());
        }
    }
    for &v in &h.vertices {
        let holding: Vec<usize> = (0..n).filter(|&b| contains(b, v)).collect();
        if reach(&adj, holding[0], |b| contains(b, v)).len() != holding.len() {
            return TdCheck::RunningIntersection(v);
        }
    }
    TdCheck::Pass
}

fn reach(adj: &[Vec<usize>], start: usize, allowed: impl Fn(usize) -> bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if allowed(y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn cover_examples() {
        // d=0 e=1 f=2
        let h = Hypergraph::new(0..3, vec![vec![0, 2], vec![1, 2], vec![0, 1], vec![2], vec![1]]).unwrap();
        let c = fractional_edge_cover(&h, None).unwrap();
        assert_eq!(c.objective, r(3, 2));
        assert_eq!(c.lambda[0].1, r(1, 2));
        assert_eq!(c.lambda[1].1, r(1, 2));
        assert_eq!(c.lambda[2].1, r(1, 2));

        let single = Hypergraph::new(0..3, vec![vec![0, 1, 2]]).unwrap();
        let c = fractional_edge_cover(&single, None).unwrap();
        assert_eq!((c.objective, c.lambda[0].1.clone()), (r(1, 1), r(1, 1)));

        let path = Hypergraph::new(0..3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(rho_star(&path).unwrap(), r(2, 1));
        assert_eq!(fractional_edge_cover(&path, Some(&[1])).unwrap().objective, r(1, 1));
    }

    #[test]
    fn uncoverable_vertex_is_named() {
        let h = Hypergraph::new(0..3, vec![vec![0, 1]]).unwrap();
        assert!(matches!(fractional_edge_cover(&h, None), Err(FaqError::Uncoverable(2))));
    }

    #[test]
    fn weighted_cover_uses_log_sizes() {
        let mut h = Hypergraph::new(0..2, vec![vec![0, 1], vec![0], vec![1]]).unwrap();
        h.set_weight(0, EdgeWeight::Log2(r(10, 1)));
        h.set_weight(1, EdgeWeight::Log2(r(2, 1)));
        h.set_weight(2, EdgeWeight::Log2(r(3, 1)));
        assert_eq!(fractional_edge_cover(&h, None).unwrap().objective, r(5, 1));
    }

    /// Every λ with entries in {0, 1/4, 1/3, 1/2, 2/3, 3/4, 1}.
    fn grid_minimum(num_vertices: usize, edges: &[Vec<usize>]) -> Option<BigRational> {
        let grid = [r(0, 1), r(1, 4), r(1, 3), r(1, 2), r(2, 3), r(3, 4), r(1, 1)];
        let mut best: Option<BigRational> = None;
        let mut idx = vec![0usize; edges.len()];
        loop {
            let feasible = (0..num_vertices).all(|v| {
                let s: BigRational = edges
                    .iter()
                    .zip(&idx)
                    .filter(|(e, _)| e.contains(&v))
                    .map(|(_, &i)| grid[i].clone())
                    .sum();
                s >= BigRational::one()
            });
            if feasible {
                let total: BigRational = idx.iter().map(|&i| grid[i].clone()).sum();
                if best.as_ref().is_none_or(|b| total < *b) {
                    best = Some(total);
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < grid.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn cover_is_feasible_and_beats_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let m = rng.gen_range(1..=5);
            let edges: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let mut e: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.45)).collect();
                    if e.is_empty() {
                        e.push(rng.gen_range(0..n));
                    }
                    e
                })
                .collect();
            let h = Hypergraph::new(0..n, edges.clone()).unwrap();
            let Ok(c) = fractional_edge_cover(&h, None) else {
                assert!(grid_minimum(n, &edges).is_none());
                continue;
            };
            for v in 0..n {
                let s: BigRational = c
                    .lambda
                    .iter()
                    .filter(|(id, _)| edges[*id].contains(&v))
                    .map(|(_, l)| l.clone())
                    .sum();
                assert!(s >= BigRational::one());
            }
            let grid = grid_minimum(n, &edges).unwrap();
            assert!(c.objective <= grid, "{edges:?}: {} > {}", c.objective, grid);
        }
    }

    /// Fig. 1(a): a=0 b=1 c=2 d=3 e=4 f=5 g=6 h=7; R S T U V W Y.
    fn running_example() -> Hypergraph {
        Hypergraph::new(
            0..8,
            vec![vec![0, 1], vec![0, 2], vec![1, 2, 3, 4], vec![3, 5], vec![4, 5], vec![4, 6], vec![5, 7]],
        )
        .unwrap()
    }

    #[test]
    fn running_example_f_step() {
        let h = running_example();
        let s = eliminate_step(&h, 7, StepMode::Semiring).unwrap(); // h
        let s = eliminate_step(&s.successor, 6, StepMode::Semiring).unwrap(); // g
        assert!(s.projections.is_empty());
        let psi2 = s.new_edge.unwrap();
        let s = eliminate_step(&s.successor, 5, StepMode::Semiring).unwrap(); // f
        assert_eq!(s.union, vec![3, 4, 5]);
        assert_eq!(s.boundary.len(), 3);
        assert_eq!(s.absorbed, vec![psi2]);
        assert_eq!(s.projections.len(), 1);
        assert_eq!((s.projections[0].source, s.projections[0].vars.clone()), (2, vec![3, 4]));
        assert!(s.successor.edges().iter().all(|e| !e.contains(5)));
        assert!(s.successor.edge(psi2).is_none());
        let new = s.successor.edge(s.new_edge.unwrap()).unwrap();
        assert_eq!(new.vars, vec![3, 4]);
        assert_eq!(rho_star(&s.subquery).unwrap(), r(3, 2));
    }

    #[test]
    fn degenerate_unary_step() {
        let h = Hypergraph::new(0..2, vec![vec![0], vec![1]]).unwrap();
        let s = eliminate_step(&h, 0, StepMode::Semiring).unwrap();
        assert_eq!(s.union, vec![0]);
        assert_eq!(s.successor.edges().len(), 2);
        assert!(s.successor.edge(s.new_edge.unwrap()).unwrap().vars.is_empty());
        assert!(s.successor.edge(0).is_none());
    }

    #[test]
    fn product_step_shrinks_edges() {
        let h = Hypergraph::new(0..2, vec![vec![0, 1]]).unwrap();
        let s = eliminate_step(&h, 0, StepMode::Product).unwrap();
        assert_eq!(s.successor.edges().len(), 1);
        assert_eq!(s.successor.edges()[0].vars, vec![1]);
        assert!(s.new_edge.is_none());
        assert!(s.subquery.edges().is_empty());
    }

    #[test]
    fn absent_variable_rejected() {
        let h = Hypergraph::new(0..2, vec![vec![0, 1]]).unwrap();
        assert!(eliminate_step(&h, 5, StepMode::Semiring).is_err());
    }

    #[test]
    fn running_example_decomposition() {
        let h = running_example();
        // b d c a e f g h
        let order = [1, 3, 2, 0, 4, 5, 6, 7];
        let td = tree_decomposition_from_ordering(&h, &order).unwrap();
        let bags: BTreeSet<Vec<VarId>> = td.bags.iter().cloned().collect();
        let expected: BTreeSet<Vec<VarId>> =
            [vec![5, 7], vec![4, 6], vec![3, 4, 5], vec![0, 1, 2], vec![1, 2, 3, 4]].into_iter().collect();
        assert_eq!(bags, expected);
        let id = |b: &[VarId]| td.bags.iter().position(|x| x == b).unwrap();
        let mut edges: Vec<(usize, usize)> = td
            .tree_edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        let mut expected_edges: Vec<(usize, usize)> = [
            (id(&[1, 2, 3, 4]), id(&[0, 1, 2])),
            (id(&[1, 2, 3, 4]), id(&[3, 4, 5])),
            (id(&[3, 4, 5]), id(&[4, 6])),
            (id(&[3, 4, 5]), id(&[5, 7])),
        ]
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
        expected_edges.sort_unstable();
        assert_eq!(edges, expected_edges);
        assert_eq!(td.width(), r(3, 2));
    }

    #[test]
    fn small_decompositions() {
        let h = Hypergraph::new(0..2, vec![vec![0, 1]]).unwrap();
        let td = tree_decomposition_from_ordering(&h, &[0, 1]).unwrap();
        assert_eq!(td.bags, vec![vec![0, 1]]);
        assert_eq!(td.width(), r(1, 1));

        let tri = Hypergraph::new(0..3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let td = tree_decomposition_from_ordering(&tri, &[2, 0, 1]).unwrap();
        assert_eq!(td.bags[0], vec![0, 1, 2]);
        assert_eq!(td.width(), r(3, 2));
    }

    #[test]
    fn validation_reports_violations() {
        let h = Hypergraph::new(0..4, vec![vec![0, 2]]).unwrap();
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![2, 3]],
            tree_edges: vec![(0, 1)],
            widths: vec![],
        };
        assert_eq!(validate_tree_decomposition(&td, &h), TdCheck::UncoveredEdge(vec![0, 2]));

        let h = Hypergraph::new(0..4, vec![vec![0, 1], vec![2, 3], vec![0, 2]]).unwrap();
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![2, 3], vec![0, 2]],
            tree_edges: vec![(0, 1), (1, 2)],
            widths: vec![],
        };
        assert_eq!(validate_tree_decomposition(&td, &h), TdCheck::RunningIntersection(0));
    }

    #[test]
    fn random_decompositions_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=8);
            let edges: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let mut e: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
                    if e.is_empty() {
                        e.push(rng.gen_range(0..n));
                    }
                    e
                })
                .collect();
            let h = Hypergraph::new(0..n, edges).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let td = tree_decomposition_from_ordering(&h, &order).unwrap();
            assert_eq!(validate_tree_decomposition(&td, &h), TdCheck::Pass);
        }
    }
}
