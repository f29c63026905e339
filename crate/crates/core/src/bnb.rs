//! Spatial branch and bound on the best SLC bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use slcpop_conic::SolveStatus;

use crate::bestslc::{solve_relaxation, RootBound, RootOptions};
use crate::local::local_search_upper_bound;
use crate::poly::BoxDomain;
use crate::problem::Problem;
use crate::SlcError;

pub const THREADS_ENV: &str = "SLC_POPT_THREADS";

#[derive(Debug, Clone)]
pub struct BnbOptions {
    /// Relative gap `(UB − LB)/max(1, |UB|)` at which the search stops.
    pub gap: f64,
    pub max_time: Option<Duration>,
    pub max_nodes: Option<usize>,
    /// Extra random starts of the root local search.
    pub starts: usize,
    pub seed: u64,
    pub threads: usize,
    pub root: RootOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            gap: 1e-4,
            max_time: None,
            max_nodes: None,
            starts: 20,
            seed: 0,
            threads: threads_from_env(),
            root: RootOptions::default(),
        }
    }
}

/// Worker count from `SLC_POPT_THREADS`, default one.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode {
    pub bounds: BoxDomain,
    /// Bound used for selection: the larger of the node's own relaxation
    /// bound and the parent's.
    pub lb: f64,
    /// Bound from this node's relaxation alone.
    pub relaxation_lb: f64,
    /// Relaxed point in the node's unit coordinates.
    pub t: Vec<f64>,
    pub u: DMatrix<f64>,
    pub depth: usize,
}

impl Eq for BnbNode {}

impl Ord for BnbNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on lb, shallower first on ties
        other
            .lb
            .total_cmp(&self.lb)
            .then_with(|| other.depth.cmp(&self.depth))
    }
}

impl PartialOrd for BnbNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

impl BnbStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BnbStatus::Optimal => "optimal",
            BnbStatus::Infeasible => "infeasible",
            BnbStatus::TimeLimit => "time-limit",
            BnbStatus::NodeLimit => "node-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalResult {
    pub status: BnbStatus,
    /// Incumbent value (`+∞` without one).
    pub value: f64,
    pub point: Option<Vec<f64>>,
    pub lower_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    /// Number of branchings.
    pub hyperplanes: usize,
    pub root_lower_bound: f64,
    pub wall_time: Duration,
}

pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    if ub == f64::INFINITY && lb == f64::INFINITY {
        return 0.0;
    }
    ((ub - lb) / ub.abs().max(1.0)).max(0.0)
}

/// Branching decision for a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub var: usize,
    pub at: f64,
    pub left: BoxDomain,
    pub right: BoxDomain,
}

/// Branches on `argmax_i |U_ii − t_i²|`, split at `t_i` clamped to
/// `[0.2, 0.8]` of the edge. Liftings exact to `1e-9` fall back to the
/// midpoint of the widest edge.
pub fn branch(bounds: &BoxDomain, t: &[f64], u: &DMatrix<f64>) -> Split {
    let n = t.len();
    let mut var = 0;
    let mut worst = -1.0;
    for i in 0..n {
        let v = (u[(i, i)] - t[i] * t[i]).abs();
        if v > worst {
            worst = v;
            var = i;
        }
    }
    let frac = if worst < 1e-9 {
        let widths = bounds.widths();
        var = (0..n)
            .max_by(|&a, &b| widths[a].total_cmp(&widths[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        0.5
    } else {
        t[var].clamp(0.2, 0.8)
    };
    let (l, w) = (bounds.lower[var], bounds.upper[var] - bounds.lower[var]);
    let at = l + frac * w;
    let mut left = bounds.clone();
    let mut right = bounds.clone();
    left.upper[var] = at;
    right.lower[var] = at;
    Split { var, at, left, right }
}

enum NodeOutcome {
    Solved(Box<RootBound>),
    Infeasible,
    Failed,
}

fn solve_node(problem: &Problem, bounds: &BoxDomain, opts: &RootOptions) -> Result<NodeOutcome, SlcError> {
    match solve_relaxation(&problem.restricted(bounds), opts) {
        Ok(rb) => Ok(NodeOutcome::Solved(Box::new(rb))),
        Err(SlcError::SolverStatus { status }) => Ok(match status {
            SolveStatus::Infeasible => NodeOutcome::Infeasible,
            _ => NodeOutcome::Failed,
        }),
        Err(e) => Err(e),
    }
}

fn node_from(bounds: BoxDomain, outcome: &NodeOutcome, parent_lb: f64, depth: usize) -> Option<BnbNode> {
    let n = bounds.dim();
    match outcome {
        NodeOutcome::Infeasible => None,
        NodeOutcome::Solved(rb) => Some(BnbNode {
            t: bounds.to_unit(&rb.x),
            lb: rb.lower_bound.max(parent_lb),
            relaxation_lb: rb.lower_bound,
            u: rb.u.clone(),
            bounds,
            depth,
        }),
        NodeOutcome::Failed => Some(BnbNode {
            t: vec![0.5; n],
            lb: parent_lb,
            relaxation_lb: f64::NEG_INFINITY,
            u: DMatrix::zeros(n, n),
            bounds,
            depth,
        }),
    }
}

struct Incumbent {
    value: f64,
    point: Option<Vec<f64>>,
}

impl Incumbent {
    fn offer(&mut self, value: f64, x: Option<Vec<f64>>) {
        if x.is_some() && value < self.value {
            self.value = value;
            self.point = x;
        }
    }
}

/// Best-first branch and bound. Each node renormalizes its box, solves the
/// best SLC relaxation and runs a local search from the relaxed point.
/// With more than one worker, the children of up to `threads` nodes are
/// solved concurrently; results are merged in a fixed order.
pub fn solve_global(problem: &Problem, opts: &BnbOptions) -> Result<GlobalResult, SlcError> {
    let start = Instant::now();
    problem.bounds.check()?;
    let threads = opts.threads.max(1);
    let mut inc = Incumbent {
        value: f64::INFINITY,
        point: None,
    };
    let root_out = solve_node(problem, &problem.bounds, &opts.root)?;
    let root_x = match &root_out {
        NodeOutcome::Solved(rb) => rb.x.clone(),
        _ => problem.bounds.from_unit(&vec![0.5; problem.n()]),
    };
    let ls = local_search_upper_bound(problem, &root_x, opts.starts, opts.seed);
    inc.offer(ls.value, ls.x);
    let mut nodes = 1;
    let mut hyperplanes = 0;
    let mut heap = BinaryHeap::new();
    let root = node_from(problem.bounds.clone(), &root_out, f64::NEG_INFINITY, 0);
    let root_lb = root.as_ref().map(|r| r.relaxation_lb).unwrap_or(f64::INFINITY);
    if let Some(r) = root {
        heap.push(r);
    }
    let mut status = BnbStatus::Optimal;
    loop {
        // prune closed nodes
        let global_lb = heap.peek().map(|n| n.lb).unwrap_or(f64::INFINITY).min(inc.value);
        if relative_gap(inc.value, global_lb) <= opts.gap || heap.is_empty() {
            break;
        }
        if opts.max_time.is_some_and(|t| start.elapsed() >= t) {
            status = BnbStatus::TimeLimit;
            break;
        }
        if opts.max_nodes.is_some_and(|m| nodes >= m) {
            status = BnbStatus::NodeLimit;
            break;
        }
        let mut batch = Vec::new();
        while batch.len() < threads {
            let Some(node) = heap.pop() else { break };
            if relative_gap(inc.value, node.lb) <= opts.gap {
                continue;
            }
            batch.push(node);
        }
        if batch.is_empty() {
            continue;
        }
        let jobs: Vec<(BoxDomain, f64, usize)> = batch
            .iter()
            .flat_map(|node| {
                let s = branch(&node.bounds, &node.t, &node.u);
                [
                    (s.left, node.lb, node.depth + 1),
                    (s.right, node.lb, node.depth + 1),
                ]
            })
            .collect();
        hyperplanes += batch.len();
        let results: Vec<Result<NodeOutcome, SlcError>> = if threads == 1 {
            jobs.iter().map(|(b, _, _)| solve_node(problem, b, &opts.root)).collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = jobs
                    .iter()
                    .map(|(b, _, _)| scope.spawn(move || solve_node(problem, b, &opts.root)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("node worker panicked"))
                    .collect()
            })
        };
        for ((b, parent_lb, depth), res) in jobs.into_iter().zip(results) {
            let out = res?;
            nodes += 1;
            if let NodeOutcome::Solved(rb) = &out {
                let ls = local_search_upper_bound(&problem.restricted(&b), &rb.x, 0, opts.seed);
                if let Some(x) = ls.x {
                    // the child box is inside the root box, so the point is
                    // feasible for the full problem
                    inc.offer(ls.value, Some(x));
                }
            }
            if let Some(node) = node_from(b, &out, parent_lb, depth) {
                if relative_gap(inc.value, node.lb) > opts.gap {
                    heap.push(node);
                }
            }
        }
    }
    let lower_bound = heap.iter().map(|n| n.lb).fold(inc.value, f64::min);
    if inc.point.is_none() && heap.is_empty() && status == BnbStatus::Optimal {
        status = BnbStatus::Infeasible;
    }
    Ok(GlobalResult {
        status,
        value: inc.value,
        point: inc.point,
        lower_bound,
        gap: relative_gap(inc.value, lower_bound),
        nodes,
        hyperplanes,
        root_lower_bound: root_lb,
        wall_time: start.elapsed(),
    })
}
