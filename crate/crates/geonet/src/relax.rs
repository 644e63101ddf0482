//! Length minimization over vertex positions with pinned boundary vertices
//! and fixed topology, by subgradient descent with backtracking. Vertices
//! that collide are merged and the event logged; the surviving net at a
//! zero-gradient point is a geodesic net on the pinned set.
//!
//! Descent runs in hardware floats; the convergence tolerance (not the
//! global precision context) governs the quality of the result.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bigreal::Ctx;
use crate::error::{GeonetError, Result};
use crate::geometry::Point;
use crate::netcore::{PlanarNet, VertexKind};

#[derive(Clone, Debug)]
pub struct RelaxProblem {
    pub ids: Vec<String>,
    /// Initial positions for every vertex.
    pub positions: Vec<[f64; 2]>,
    /// Pinned vertices keep their initial position and stay unbalanced.
    pub pinned: Vec<bool>,
    /// Edges as index pairs with multiplicities.
    pub edges: Vec<(usize, usize, u64)>,
    pub grad_tol: f64,
    /// Defaults to `1e-9 x` problem diameter.
    pub merge_threshold: Option<f64>,
    pub max_iters: usize,
}

impl RelaxProblem {
    pub fn check(&self) -> Result<()> {
        let n = self.ids.len();
        if self.positions.len() != n || self.pinned.len() != n {
            return Err(GeonetError::Precondition("inconsistent problem arrays".into()));
        }
        if !self.pinned.iter().any(|&p| p) {
            return Err(GeonetError::Precondition("pinned set must be non-empty".into()));
        }
        for &(a, b, m) in &self.edges {
            if a >= n || b >= n || a == b || m == 0 {
                return Err(GeonetError::Precondition("bad edge in problem".into()));
            }
        }
        // connectivity over the abstract graph
        let mut adj = vec![Vec::new(); n];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != n {
            return Err(GeonetError::Precondition("problem graph is disconnected".into()));
        }
        Ok(())
    }

    fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                let dx = self.positions[i][0] - self.positions[j][0];
                let dy = self.positions[i][1] - self.positions[j][1];
                d = d.max(dx.hypot(dy));
            }
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxEventKind {
    /// Two vertices moved within the merge threshold.
    VertexMerge,
    /// An edge shrank to a point (its endpoints merged).
    EdgeShrink,
}

#[derive(Clone, Debug)]
pub struct RelaxEvent {
    pub iteration: usize,
    pub kind: RelaxEventKind,
    pub survivor: String,
    pub removed: String,
}

#[derive(Debug)]
pub struct RelaxTrace {
    pub iterations: usize,
    pub lengths: Vec<f64>,
    pub events: Vec<RelaxEvent>,
    pub converged: bool,
    pub final_net: PlanarNet,
}

/// Descend the total-length objective until the free-vertex gradient norm
/// falls below tolerance, logging merge events along the way.
pub fn relax(problem: &RelaxProblem) -> Result<RelaxTrace> {
    problem.check()?;
    let merge_threshold = problem
        .merge_threshold
        .unwrap_or_else(|| 1e-9 * problem.diameter().max(1e-300));

    let n = problem.ids.len();
    let mut pos = problem.positions.clone();
    let mut alive: Vec<bool> = vec![true; n];
    // edge multiset keyed by endpoint pair
    let mut edges: HashMap<(usize, usize), u64> = HashMap::new();
    for &(a, b, m) in &problem.edges {
        *edges.entry((a.min(b), a.max(b))).or_insert(0) += m;
    }

    let length = |pos: &[[f64; 2]], edges: &HashMap<(usize, usize), u64>| -> f64 {
        edges
            .iter()
            .map(|(&(a, b), &m)| {
                let dx = pos[a][0] - pos[b][0];
                let dy = pos[a][1] - pos[b][1];
                dx.hypot(dy) * m as f64
            })
            .sum()
    };

    let mut lengths = Vec::new();
    let mut events = Vec::new();
    let mut converged = false;
    let mut step_hint = 0.25 * problem.diameter().max(1e-12);
    let coincide_eps = 1e-300f64.max(merge_threshold * 1e-3);

    let mut iterations = 0;
    for iter in 0..problem.max_iters {
        iterations = iter + 1;
        let f0 = length(&pos, &edges);
        lengths.push(f0);

        // subgradient: sum of unit vectors of edges with positive length
        let mut grad = vec![[0.0f64; 2]; n];
        for (&(a, b), &m) in &edges {
            let dx = pos[a][0] - pos[b][0];
            let dy = pos[a][1] - pos[b][1];
            let d = dx.hypot(dy);
            if d < coincide_eps {
                continue;
            }
            let (ux, uy) = (dx / d * m as f64, dy / d * m as f64);
            if !problem.pinned[a] {
                grad[a][0] += ux;
                grad[a][1] += uy;
            }
            if !problem.pinned[b] {
                grad[b][0] -= ux;
                grad[b][1] -= uy;
            }
        }
        let gnorm: f64 = grad
            .iter()
            .enumerate()
            .filter(|&(i, _)| alive[i])
            .map(|(_, g)| g[0] * g[0] + g[1] * g[1])
            .sum::<f64>()
            .sqrt();
        if gnorm < problem.grad_tol {
            converged = true;
            break;
        }

        // backtracking line search along the negative subgradient
        let mut t = step_hint;
        let mut accepted = false;
        for _ in 0..80 {
            let cand: Vec<[f64; 2]> = pos
                .iter()
                .enumerate()
                .map(|(i, p)| [p[0] - t * grad[i][0], p[1] - t * grad[i][1]])
                .collect();
            let fc = length(&cand, &edges);
            if fc <= f0 - 1e-4 * t * gnorm * gnorm {
                pos = cand;
                accepted = true;
                step_hint = t * 2.0;
                break;
            }
            t *= 0.5;
        }
        // steps below float resolution: hand over to the polish phase
        if accepted && t * gnorm < 1e-15 * problem.diameter().max(1e-12) {
            break;
        }
        if !accepted {
            // objective differences fell below float resolution; finish with
            // a Newton polish on the balance equations
            break;
        }

        // merge pass
        loop {
            let mut merged = None;
            'outer: for i in 0..n {
                if !alive[i] {
                    continue;
                }
                for j in (i + 1)..n {
                    if !alive[j] || (problem.pinned[i] && problem.pinned[j]) {
                        continue;
                    }
                    let dx = pos[i][0] - pos[j][0];
                    let dy = pos[i][1] - pos[j][1];
                    if dx.hypot(dy) < merge_threshold {
                        merged = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let Some((i, j)) = merged else { break };
            // pinned vertex survives; otherwise the smaller index
            let (survivor, removed) = if problem.pinned[j] { (j, i) } else { (i, j) };
            let kind = if edges.contains_key(&(i.min(j), i.max(j))) {
                RelaxEventKind::EdgeShrink
            } else {
                RelaxEventKind::VertexMerge
            };
            events.push(RelaxEvent {
                iteration: iter,
                kind,
                survivor: problem.ids[survivor].clone(),
                removed: problem.ids[removed].clone(),
            });
            alive[removed] = false;
            let mut next: HashMap<(usize, usize), u64> = HashMap::new();
            for (&(a, b), &m) in &edges {
                let a2 = if a == removed { survivor } else { a };
                let b2 = if b == removed { survivor } else { b };
                if a2 == b2 {
                    continue; // the shrunk edge disappears
                }
                *next.entry((a2.min(b2), a2.max(b2))).or_insert(0) += m;
            }
            edges = next;
        }
    }

    // Newton polish on the stationarity system for the surviving free
    // vertices; the descent phase has brought us into its basin
    if !converged {
        let min_edge = edges
            .keys()
            .map(|&(a, b)| {
                let dx = pos[a][0] - pos[b][0];
                let dy = pos[a][1] - pos[b][1];
                dx.hypot(dy)
            })
            .fold(f64::INFINITY, f64::min);
        if min_edge > 10.0 * merge_threshold {
            newton_polish(&mut pos, &alive, &problem.pinned, &edges, problem.grad_tol);
        }
        let gnorm = {
            let mut s = 0.0f64;
            let mut grad = vec![[0.0f64; 2]; n];
            for (&(a, b), &m) in &edges {
                let dx = pos[a][0] - pos[b][0];
                let dy = pos[a][1] - pos[b][1];
                let d = dx.hypot(dy);
                if d < coincide_eps {
                    continue;
                }
                let (ux, uy) = (dx / d * m as f64, dy / d * m as f64);
                if !problem.pinned[a] {
                    grad[a][0] += ux;
                    grad[a][1] += uy;
                }
                if !problem.pinned[b] {
                    grad[b][0] -= ux;
                    grad[b][1] -= uy;
                }
            }
            for (i, g) in grad.iter().enumerate() {
                if alive[i] && !problem.pinned[i] {
                    s += g[0] * g[0] + g[1] * g[1];
                }
            }
            s.sqrt()
        };
        converged = gnorm < problem.grad_tol.max(1e-13);
    }

    // assemble the surviving net; its tolerance reflects the f64 descent
    let ctx = Ctx::new(50);
    let mut net = PlanarNet::new(ctx);
    net.set_tolerance(ctx.from_f64(problem.grad_tol.max(1e-12) * 100.0));
    for i in 0..n {
        if !alive[i] {
            continue;
        }
        let kind = if problem.pinned[i] {
            VertexKind::Boundary
        } else {
            VertexKind::Interior
        };
        let p = Point::new(ctx.from_f64(pos[i][0]), ctx.from_f64(pos[i][1]));
        net.add_vertex(problem.ids[i].clone(), p, kind)?;
    }
    let mut keys: Vec<_> = edges.keys().copied().collect();
    keys.sort();
    for (a, b) in keys {
        net.add_edge(problem.ids[a].clone(), problem.ids[b].clone(), edges[&(a, b)])?;
    }

    Ok(RelaxTrace {
        iterations,
        lengths,
        events,
        converged,
        final_net: net,
    })
}

/// Damped Newton iteration on the free-vertex stationarity system.
fn newton_polish(
    pos: &mut [[f64; 2]],
    alive: &[bool],
    pinned: &[bool],
    edges: &std::collections::HashMap<(usize, usize), u64>,
    tol: f64,
) {
    let free: Vec<usize> = (0..pos.len())
        .filter(|&i| alive[i] && !pinned[i])
        .collect();
    if free.is_empty() {
        return;
    }
    let slot: HashMap<usize, usize> = free.iter().enumerate().map(|(s, &i)| (i, s)).collect();
    let dim = 2 * free.len();

    for _ in 0..60 {
        let mut g = vec![0.0f64; dim];
        let mut h = vec![0.0f64; dim * dim];
        for (&(a, b), &m) in edges {
            let dx = pos[a][0] - pos[b][0];
            let dy = pos[a][1] - pos[b][1];
            let d = dx.hypot(dy);
            if d == 0.0 {
                return; // nonsmooth point; leave as is
            }
            let w = m as f64;
            let (ux, uy) = (dx / d, dy / d);
            // Hessian block of |v - u|: (I - u u^T) / d
            let hxx = w * (1.0 - ux * ux) / d;
            let hxy = w * (-ux * uy) / d;
            let hyy = w * (1.0 - uy * uy) / d;
            if let Some(&sa) = slot.get(&a) {
                g[2 * sa] += w * ux;
                g[2 * sa + 1] += w * uy;
                h[(2 * sa) * dim + 2 * sa] += hxx;
                h[(2 * sa) * dim + 2 * sa + 1] += hxy;
                h[(2 * sa + 1) * dim + 2 * sa] += hxy;
                h[(2 * sa + 1) * dim + 2 * sa + 1] += hyy;
            }
            if let Some(&sb) = slot.get(&b) {
                g[2 * sb] -= w * ux;
                g[2 * sb + 1] -= w * uy;
                h[(2 * sb) * dim + 2 * sb] += hxx;
                h[(2 * sb) * dim + 2 * sb + 1] += hxy;
                h[(2 * sb + 1) * dim + 2 * sb] += hxy;
                h[(2 * sb + 1) * dim + 2 * sb + 1] += hyy;
            }
            if let (Some(&sa), Some(&sb)) = (slot.get(&a), slot.get(&b)) {
                h[(2 * sa) * dim + 2 * sb] -= hxx;
                h[(2 * sa) * dim + 2 * sb + 1] -= hxy;
                h[(2 * sa + 1) * dim + 2 * sb] -= hxy;
                h[(2 * sa + 1) * dim + 2 * sb + 1] -= hyy;
                h[(2 * sb) * dim + 2 * sa] -= hxx;
                h[(2 * sb) * dim + 2 * sa + 1] -= hxy;
                h[(2 * sb + 1) * dim + 2 * sa] -= hxy;
                h[(2 * sb + 1) * dim + 2 * sa + 1] -= hyy;
            }
        }
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < tol.min(1e-13) {
            return;
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let Some(delta) = solve_dense(&mut h.clone(), &rhs, dim) else {
            return;
        };
        // conservative damping
        let dn = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cap = 0.5;
        let scale = if dn > cap { cap / dn } else { 1.0 };
        for (s, &i) in free.iter().enumerate() {
            pos[i][0] += scale * delta[2 * s];
            pos[i][1] += scale * delta[2 * s + 1];
        }
        if dn * scale < 1e-15 {
            return;
        }
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[piv * n + col].abs() {
                piv = row;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in (col + 1)..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// JSON shapes (mirroring the net format conventions)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProblemVertexJson {
    id: String,
    x: String,
    y: String,
    pinned: bool,
}

#[derive(Serialize, Deserialize)]
struct ProblemEdgeJson {
    a: String,
    b: String,
    #[serde(default = "one")]
    mult: u64,
}

fn one() -> u64 {
    1
}

#[derive(Serialize, Deserialize)]
struct ProblemParamsJson {
    #[serde(default)]
    grad_tol: Option<String>,
    #[serde(default)]
    merge_threshold: Option<String>,
    #[serde(default)]
    max_iters: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    vertices: Vec<ProblemVertexJson>,
    edges: Vec<ProblemEdgeJson>,
    #[serde(default)]
    params: Option<ProblemParamsJson>,
}

impl RelaxProblem {
    pub fn from_json_str(s: &str) -> Result<RelaxProblem> {
        let parsed: ProblemJson = serde_json::from_str(s)?;
        let mut ids = Vec::new();
        let mut positions = Vec::new();
        let mut pinned = Vec::new();
        let mut index = HashMap::new();
        for v in &parsed.vertices {
            if index.contains_key(&v.id) {
                return Err(GeonetError::DuplicateVertex(v.id.clone()));
            }
            index.insert(v.id.clone(), ids.len());
            ids.push(v.id.clone());
            let x: f64 = v.x.parse().map_err(|_| GeonetError::NumberParse(v.x.clone()))?;
            let y: f64 = v.y.parse().map_err(|_| GeonetError::NumberParse(v.y.clone()))?;
            positions.push([x, y]);
            pinned.push(v.pinned);
        }
        let mut edges = Vec::new();
        for e in &parsed.edges {
            let a = *index
                .get(&e.a)
                .ok_or_else(|| GeonetError::UnknownVertex(e.a.clone()))?;
            let b = *index
                .get(&e.b)
                .ok_or_else(|| GeonetError::UnknownVertex(e.b.clone()))?;
            edges.push((a, b, e.mult));
        }
        let params = parsed.params.unwrap_or(ProblemParamsJson {
            grad_tol: None,
            merge_threshold: None,
            max_iters: None,
        });
        let grad_tol = match &params.grad_tol {
            Some(s) => s.parse().map_err(|_| GeonetError::NumberParse(s.clone()))?,
            None => 1e-10,
        };
        let merge_threshold = match &params.merge_threshold {
            Some(s) => Some(s.parse().map_err(|_| GeonetError::NumberParse(s.clone()))?),
            None => None,
        };
        Ok(RelaxProblem {
            ids,
            positions,
            pinned,
            edges,
            grad_tol,
            merge_threshold,
            max_iters: params.max_iters.unwrap_or(200_000),
        })
    }
}

impl RelaxTrace {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "iterations": self.iterations,
            "converged": self.converged,
            "final_length": format!("{:.17e}", self.lengths.last().copied().unwrap_or(0.0)),
            "lengths": self.lengths.iter().map(|l| format!("{l:.17e}")).collect::<Vec<_>>(),
            "events": self.events.iter().map(|e| serde_json::json!({
                "iteration": e.iteration,
                "kind": match e.kind { RelaxEventKind::VertexMerge => "vertex-merge", RelaxEventKind::EdgeShrink => "edge-shrink" },
                "survivor": e.survivor,
                "removed": e.removed,
            })).collect::<Vec<_>>(),
            "final": serde_json::from_str::<serde_json::Value>(&self.final_net.to_json_string()).unwrap(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y_problem(start: [f64; 2]) -> RelaxProblem {
        let h = 3f64.sqrt() / 2.0;
        RelaxProblem {
            ids: vec!["o".into(), "a".into(), "b".into(), "c".into()],
            positions: vec![start, [1.0, 0.0], [-0.5, h], [-0.5, -h]],
            pinned: vec![false, true, true, true],
            edges: vec![(0, 1, 1), (0, 2, 1), (0, 3, 1)],
            grad_tol: 1e-12,
            merge_threshold: None,
            max_iters: 200_000,
        }
    }

    #[test]
    fn y_topology_converges_to_center() {
        for start in [[0.4, 0.3], [-0.2, -0.4], [0.9, 0.0]] {
            let trace = relax(&y_problem(start)).unwrap();
            assert!(trace.converged, "not converged from {start:?}");
            let o = trace.final_net.vertex(&"o".into()).unwrap();
            let (x, y) = o.pos.to_f64();
            assert!(x.hypot(y) < 1e-8, "ended at ({x}, {y})");
            assert!(trace.final_net.validate().passes);
        }
    }

    #[test]
    fn objective_non_increasing() {
        let trace = relax(&y_problem([0.7, 0.2])).unwrap();
        for w in trace.lengths.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "increase: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn collinear_tree_merges_to_middle() {
        let problem = RelaxProblem {
            ids: vec!["s".into(), "a".into(), "b".into(), "c".into()],
            positions: vec![[0.3, 0.7], [-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            pinned: vec![false, true, true, true],
            edges: vec![(0, 1, 1), (0, 2, 1), (0, 3, 1)],
            grad_tol: 1e-10,
            merge_threshold: Some(1e-9),
            max_iters: 400_000,
        };
        let trace = relax(&problem).unwrap();
        // brute-force oracle: the geometric median of three collinear points
        // is the middle point, so the free vertex merges onto it
        assert!(
            !trace.events.is_empty(),
            "expected a merge event, lengths end {:?}",
            trace.lengths.last()
        );
        let last = trace.lengths.last().unwrap();
        assert!((last - 2.0).abs() < 1e-7, "final length {last}");
        assert!(trace.final_net.vertex(&"s".into()).is_err());
    }

    #[test]
    fn square_steiner_tree_reaches_known_minimum() {
        // two free vertices on the unit square; the minimum is 1 + sqrt(3)
        let problem = RelaxProblem {
            ids: vec![
                "s1".into(),
                "s2".into(),
                "a".into(),
                "b".into(),
                "c".into(),
                "d".into(),
            ],
            positions: vec![
                [0.45, 0.31],
                [0.52, 0.76],
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [0.0, 1.0],
            ],
            pinned: vec![false, false, true, true, true, true],
            edges: vec![(0, 2, 1), (0, 3, 1), (0, 1, 1), (1, 4, 1), (1, 5, 1)],
            grad_tol: 1e-12,
            merge_threshold: None,
            max_iters: 400_000,
        };
        let trace = relax(&problem).unwrap();
        let expect = 1.0 + 3f64.sqrt();
        let last = trace.lengths.last().unwrap();
        assert!((last - expect).abs() < 1e-8, "length {last} vs {expect}");
    }

    #[test]
    fn richer_topology_collapses() {
        // a triangle of free vertices over a square typically collapses
        let problem = RelaxProblem {
            ids: vec![
                "u".into(),
                "v".into(),
                "w".into(),
                "a".into(),
                "b".into(),
                "c".into(),
                "d".into(),
            ],
            positions: vec![
                [0.43, 0.47],
                [0.55, 0.52],
                [0.5, 0.58],
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [0.0, 1.0],
            ],
            pinned: vec![false, false, false, true, true, true, true],
            edges: vec![
                (0, 3, 1),
                (0, 4, 1),
                (1, 5, 1),
                (2, 6, 1),
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
            ],
            grad_tol: 1e-10,
            merge_threshold: Some(1e-7),
            max_iters: 400_000,
        };
        let trace = relax(&problem).unwrap();
        assert!(!trace.events.is_empty(), "expected collapse events");
        let rep = trace.final_net.validate();
        assert!(rep.passes, "residual {}", rep.max_interior_residual);
    }

    #[test]
    fn problem_json_round_trip() {
        let s = r#"{
            "vertices": [
                {"id": "o", "x": "0.2", "y": "0.1", "pinned": false},
                {"id": "a", "x": "1", "y": "0", "pinned": true},
                {"id": "b", "x": "-0.5", "y": "0.866", "pinned": true},
                {"id": "c", "x": "-0.5", "y": "-0.866", "pinned": true}
            ],
            "edges": [
                {"a": "o", "b": "a"},
                {"a": "o", "b": "b"},
                {"a": "o", "b": "c"}
            ],
            "params": {"grad_tol": "1e-11"}
        }"#;
        let p = RelaxProblem::from_json_str(s).unwrap();
        assert_eq!(p.ids.len(), 4);
        assert_eq!(p.grad_tol, 1e-11);
        let trace = relax(&p).unwrap();
        assert!(trace.converged);
        let json = trace.to_json();
        assert!(json["converged"].as_bool().unwrap());
    }
}
