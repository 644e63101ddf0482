//! Planar geodesic (multi)nets: vertices with boundary/interior marking,
//! weighted straight edges, and the stationarity identities as executable
//! checks (total imbalance, the length-via-imbalance formula, and its
//! truncated-disk refinement).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bigreal::{BigReal, Ctx};
use crate::error::{GeonetError, Result};
use crate::geometry::{convex_hull, hull_excess, point_segment_distance, segment_circle_params, Point};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Boundary,
    Interior,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub id: VertexId,
    pub pos: Point,
    pub kind: VertexKind,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub mult: u64,
}

/// A planar geodesic (multi)net.
///
/// Generators keep the conventions (no boundary-boundary edges, connected);
/// the validator reports violations instead of rejecting, so malformed inputs
/// can be diagnosed.
#[derive(Clone, Debug)]
pub struct PlanarNet {
    ctx: Ctx,
    tolerance: BigReal,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    index: HashMap<VertexId, usize>,
}

impl PlanarNet {
    pub fn new(ctx: Ctx) -> PlanarNet {
        PlanarNet {
            ctx,
            tolerance: ctx.default_tolerance(),
            vertices: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn tolerance(&self) -> &BigReal {
        &self.tolerance
    }

    pub fn set_tolerance(&mut self, tol: BigReal) {
        self.tolerance = tol;
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: &VertexId) -> Result<&Vertex> {
        self.index
            .get(id)
            .map(|&i| &self.vertices[i])
            .ok_or_else(|| GeonetError::UnknownVertex(id.0.clone()))
    }

    pub fn vertex_index(&self, id: &VertexId) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GeonetError::UnknownVertex(id.0.clone()))
    }

    pub fn add_vertex(&mut self, id: impl Into<VertexId>, pos: Point, kind: VertexKind) -> Result<VertexId> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(GeonetError::DuplicateVertex(id.0));
        }
        if !pos.is_finite() {
            return Err(GeonetError::NonFinitePosition(id.0));
        }
        self.index.insert(id.clone(), self.vertices.len());
        self.vertices.push(Vertex {
            id: id.clone(),
            pos,
            kind,
        });
        Ok(id)
    }

    pub fn add_edge(&mut self, a: impl Into<VertexId>, b: impl Into<VertexId>, mult: u64) -> Result<()> {
        let (a, b) = (a.into(), b.into());
        if mult == 0 {
            return Err(GeonetError::ZeroMultiplicity { a: a.0, b: b.0 });
        }
        let ia = self.vertex_index(&a)?;
        let ib = self.vertex_index(&b)?;
        if ia == ib {
            return Err(GeonetError::DegenerateEdge { a: a.0, b: b.0 });
        }
        let len = self.vertices[ia].pos.dist(&self.vertices[ib].pos);
        if len.is_zero() {
            return Err(GeonetError::DegenerateEdge { a: a.0, b: b.0 });
        }
        self.edges.push(Edge { a, b, mult });
        Ok(())
    }

    pub fn edge_endpoints(&self, e: &Edge) -> (&Vertex, &Vertex) {
        (
            &self.vertices[self.index[&e.a]],
            &self.vertices[self.index[&e.b]],
        )
    }

    pub fn length_of(&self, e: &Edge) -> BigReal {
        let (va, vb) = self.edge_endpoints(e);
        va.pos.dist(&vb.pos)
    }

    /// Largest pairwise distance between vertices (0 for empty nets).
    pub fn diameter(&self) -> BigReal {
        let mut best = self.ctx.zero();
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                let d = self.vertices[i].pos.dist(&self.vertices[j].pos);
                best = best.max(&d);
            }
        }
        best
    }

    /// Cheap upper bound on the diameter, for tolerance scaling.
    fn scale_estimate(&self) -> BigReal {
        let mut m = 0.0f64;
        for v in &self.vertices {
            let (x, y) = v.pos.to_f64();
            m = m.max(x.abs()).max(y.abs());
        }
        self.ctx.from_f64((2.0 * m).max(1.0) * 1.0000001)
    }

    fn incident(&self, idx: usize) -> Vec<(usize, u64)> {
        let id = &self.vertices[idx].id;
        let mut out = Vec::new();
        for e in &self.edges {
            if &e.a == id {
                out.push((self.index[&e.b], e.mult));
            } else if &e.b == id {
                out.push((self.index[&e.a], e.mult));
            }
        }
        out
    }

    /// Incidence lists for all vertices in one pass over the edges.
    fn incidence_lists(&self) -> Vec<Vec<(usize, u64)>> {
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            let (a, b) = (self.index[&e.a], self.index[&e.b]);
            adj[a].push((b, e.mult));
            adj[b].push((a, e.mult));
        }
        adj
    }

    fn imbalance_at(&self, idx: usize, neighbours: &[(usize, u64)]) -> ImbalanceRecord {
        let pos = &self.vertices[idx].pos;
        let mut sum = Point::origin(self.ctx);
        for &(other, mult) in neighbours {
            let d = self.vertices[other].pos.sub(pos);
            let n = d.norm();
            let w = &self.ctx.int(mult as i64) / &n;
            sum = sum.add(&d.scale(&w));
        }
        let norm = sum.norm();
        ImbalanceRecord {
            vertex: self.vertices[idx].id.clone(),
            vector: sum,
            norm,
        }
    }

    /// Multiplicity-weighted sum of unit vectors from `v` toward its
    /// neighbours, with its Euclidean norm.
    pub fn imbalance(&self, v: &VertexId) -> Result<ImbalanceRecord> {
        let idx = self.vertex_index(v)?;
        let pos = &self.vertices[idx].pos;
        let mut sum = Point::origin(self.ctx);
        for (other, mult) in self.incident(idx) {
            let d = self.vertices[other].pos.sub(pos);
            let n = d.norm();
            if n.is_zero() {
                return Err(GeonetError::DegenerateEdge {
                    a: v.0.clone(),
                    b: self.vertices[other].id.0.clone(),
                });
            }
            let w = &self.ctx.int(mult as i64) / &n;
            sum = sum.add(&d.scale(&w));
        }
        let norm = sum.norm();
        Ok(ImbalanceRecord {
            vertex: v.clone(),
            vector: sum,
            norm,
        })
    }

    /// Sum of imbalance vectors over all vertices; identically zero up to
    /// accumulated rounding for any net, balanced or not.
    pub fn total_imbalance_vector(&self) -> Point {
        let adj = self.incidence_lists();
        let mut sum = Point::origin(self.ctx);
        for i in 0..self.vertices.len() {
            sum = sum.add(&self.imbalance_at(i, &adj[i]).vector);
        }
        sum
    }

    /// Sum of imbalance norms over boundary vertices.
    pub fn total_imbalance(&self) -> BigReal {
        let adj = self.incidence_lists();
        let mut sum = self.ctx.zero();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.kind == VertexKind::Boundary {
                sum = &sum + &self.imbalance_at(i, &adj[i]).norm;
            }
        }
        sum
    }

    /// Total multiplicity-weighted length.
    pub fn length(&self) -> BigReal {
        let mut sum = self.ctx.zero();
        for e in &self.edges {
            sum = &sum + &(&self.length_of(e) * &self.ctx.int(e.mult as i64));
        }
        sum
    }

    /// Length via the boundary-imbalance formula; refuses nets whose interior
    /// vertices are unbalanced beyond tolerance, where the identity does not
    /// apply.
    pub fn length_via_imbalance(&self) -> Result<BigReal> {
        let adj = self.incidence_lists();
        let mut sum = self.ctx.zero();
        for (i, v) in self.vertices.iter().enumerate() {
            let rec = self.imbalance_at(i, &adj[i]);
            match v.kind {
                VertexKind::Interior => {
                    if rec.norm > self.tolerance {
                        return Err(GeonetError::UnbalancedInterior(
                            v.id.0.clone(),
                            rec.norm.to_dec_string_digits(6),
                        ));
                    }
                }
                VertexKind::Boundary => {
                    sum = &sum + &v.pos.dot(&rec.vector);
                }
            }
        }
        Ok(-sum)
    }

    /// Validation report: per-vertex interior residuals, convex-hull check,
    /// connectivity and the no-boundary-boundary-edge convention.
    pub fn validate(&self) -> ValidationReport {
        let adj = self.incidence_lists();
        let mut residuals = Vec::new();
        let mut max_res = self.ctx.zero();
        let mut unbalanced = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.kind == VertexKind::Interior {
                let rec = self.imbalance_at(i, &adj[i]);
                if rec.norm > max_res {
                    max_res = rec.norm.clone();
                }
                if rec.norm > self.tolerance {
                    unbalanced.push(v.id.clone());
                }
                residuals.push((v.id.clone(), rec.norm));
            }
        }

        let boundary_pts: Vec<Point> = self
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Boundary)
            .map(|v| v.pos.clone())
            .collect();
        let hull_idx = convex_hull(&boundary_pts);
        let hull: Vec<Point> = hull_idx.iter().map(|&i| boundary_pts[i].clone()).collect();
        let scale = self.scale_estimate();
        let hull_tol = &self.tolerance * &scale;
        let mut hull_violations = Vec::new();
        for v in &self.vertices {
            let excess = hull_excess(&v.pos, &hull);
            if excess > hull_tol {
                hull_violations.push((v.id.clone(), excess));
            }
        }

        let mut boundary_boundary = Vec::new();
        for e in &self.edges {
            let (va, vb) = self.edge_endpoints(e);
            if va.kind == VertexKind::Boundary && vb.kind == VertexKind::Boundary {
                boundary_boundary.push((e.a.clone(), e.b.clone()));
            }
        }

        let connected = self.is_connected();
        // stationarity: balance, hull and connectivity; edges between
        // boundary vertices violate only the classification convention and
        // are flagged separately
        let passes = unbalanced.is_empty() && hull_violations.is_empty() && connected;
        ValidationReport {
            residuals,
            max_interior_residual: max_res,
            unbalanced_interior: unbalanced,
            hull_violations,
            boundary_boundary_edges: boundary_boundary,
            connected,
            passes,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let n = self.vertices.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let (a, b) = (self.index[&e.a], self.index[&e.b]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
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
        count == n
    }

    /// Both sides of the truncated length identity on the disk of radius `r`
    /// about `origin`. Errors when `r` is special (circle near-tangent to an
    /// edge or near a vertex) or the origin lies on the net.
    pub fn disk_length_identity(&self, r: &BigReal, origin: &Point) -> Result<DiskIdentity> {
        let scale = self.scale_estimate();
        let tol = &(&self.tolerance * &scale) * &self.ctx.int(16);

        for v in &self.vertices {
            let d = v.pos.dist(origin);
            if (&d - r).abs() < tol {
                return Err(GeonetError::SpecialRadius(format!(
                    "circle passes near vertex {}",
                    v.id
                )));
            }
        }
        for e in &self.edges {
            let (va, vb) = self.edge_endpoints(e);
            let (dist, _) = point_segment_distance(origin, &va.pos, &vb.pos);
            if dist < tol {
                return Err(GeonetError::Precondition("origin lies on the net".into()));
            }
            if (&dist - r).abs() < tol {
                return Err(GeonetError::SpecialRadius(format!(
                    "circle near-tangent to edge {}-{}",
                    e.a, e.b
                )));
            }
        }

        let mut lhs = self.ctx.zero();
        let mut crossing_sum = self.ctx.zero();
        let one = self.ctx.one();
        let two = self.ctx.int(2);
        for e in &self.edges {
            let (va, vb) = self.edge_endpoints(e);
            let m = self.ctx.int(e.mult as i64);
            let d = vb.pos.sub(&va.pos);
            let elen = d.norm();
            let u = d.unit().expect("validated nonzero");
            let inside = |t: &BigReal| -> bool { va.pos.add(&d.scale(t)).dist(origin) < *r };
            let ts = segment_circle_params(&va.pos, &vb.pos, origin, r);
            // accumulate inside sub-intervals
            let mut breaks = vec![self.ctx.zero()];
            breaks.extend(ts.iter().cloned());
            breaks.push(one.clone());
            for w in breaks.windows(2) {
                let mid = &(&w[0] + &w[1]) / &two;
                if inside(&mid) {
                    lhs = &lhs + &(&(&(&w[1] - &w[0]) * &elen) * &m);
                }
            }
            // crossing contributions with outward-directed edge unit vector
            for t in &ts {
                if t.is_zero() || *t == one {
                    continue;
                }
                let pt = va.pos.add(&d.scale(t));
                let q = pt.sub(origin);
                let eps = &self.tolerance * &self.ctx.from_f64(0.5);
                let after = &(t + &eps).min(&one);
                let outward = if inside(after) { u.neg() } else { u.clone() };
                crossing_sum = &crossing_sum + &(&q.dot(&outward) * &m);
            }
        }

        let adj = self.incidence_lists();
        let mut vertex_sum = self.ctx.zero();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.pos.dist(origin) < *r {
                let rec = self.imbalance_at(i, &adj[i]);
                vertex_sum = &vertex_sum + &v.pos.sub(origin).dot(&rec.vector);
            }
        }

        let rhs = &crossing_sum - &vertex_sum;
        Ok(DiskIdentity {
            lhs,
            rhs,
            crossing_sum,
            vertex_sum,
        })
    }

    /// Evaluate the truncated length identity at many radii with shared
    /// precomputation. Returns one result per radius; special radii yield
    /// errors, everything else the two sides of the identity.
    pub fn disk_identity_batch(
        &self,
        radii: &[BigReal],
        origin: &Point,
    ) -> Vec<Result<DiskIdentity>> {
        let ctx = self.ctx;
        let scale = self.scale_estimate();
        let tol = &(&self.tolerance * &scale) * &ctx.int(16);
        let strip = 1e-9 * scale.to_f64();
        let adj = self.incidence_lists();

        // per-vertex: exact distance to origin and imbalance pairing term
        let nv = self.vertices.len();
        let mut vdist: Vec<BigReal> = Vec::with_capacity(nv);
        let mut vterm: Vec<BigReal> = Vec::with_capacity(nv);
        for (i, v) in self.vertices.iter().enumerate() {
            vdist.push(v.pos.dist(origin));
            let rec = self.imbalance_at(i, &adj[i]);
            vterm.push(v.pos.sub(origin).dot(&rec.vector));
        }
        let mut vorder: Vec<usize> = (0..nv).collect();
        vorder.sort_by(|&a, &b| vdist[a].partial_cmp(&vdist[b]).unwrap());
        let vdist_f: Vec<f64> = vorder.iter().map(|&i| vdist[i].to_f64()).collect();
        let mut vprefix: Vec<BigReal> = Vec::with_capacity(nv + 1);
        vprefix.push(ctx.zero());
        for &i in &vorder {
            let next = vprefix.last().unwrap() + &vterm[i];
            vprefix.push(next);
        }

        // per-edge: endpoint and interior minimum distances, exact length
        struct EdgeGeom {
            d_max: BigReal,
            d_min: BigReal,
            weighted_len: BigReal,
            idx: usize,
        }
        let ne = self.edges.len();
        let mut egeo: Vec<EdgeGeom> = Vec::with_capacity(ne);
        let mut origin_on_net = false;
        for (idx, e) in self.edges.iter().enumerate() {
            let (va, vb) = self.edge_endpoints(e);
            let (ia, ib) = (self.index[&e.a], self.index[&e.b]);
            let (dmin, _) = point_segment_distance(origin, &va.pos, &vb.pos);
            if dmin < tol {
                origin_on_net = true;
            }
            let d_max = vdist[ia].max(&vdist[ib]);
            egeo.push(EdgeGeom {
                d_max,
                d_min: dmin,
                weighted_len: &self.length_of(e) * &ctx.int(e.mult as i64),
                idx,
            });
        }
        egeo.sort_by(|a, b| a.d_max.partial_cmp(&b.d_max).unwrap());
        let emax_f: Vec<f64> = egeo.iter().map(|g| g.d_max.to_f64()).collect();
        let emin_f: Vec<f64> = egeo.iter().map(|g| g.d_min.to_f64()).collect();
        let mut eprefix: Vec<BigReal> = Vec::with_capacity(ne + 1);
        eprefix.push(ctx.zero());
        for g in &egeo {
            let next = eprefix.last().unwrap() + &g.weighted_len;
            eprefix.push(next);
        }

        let one = ctx.one();
        let two = ctx.int(2);
        radii
            .iter()
            .map(|r| {
                if origin_on_net {
                    return Err(GeonetError::Precondition("origin lies on the net".into()));
                }
                let rf = r.to_f64();
                // specialness: near-vertex and near-tangent radii
                for (k, df) in vdist_f.iter().enumerate() {
                    if (df - rf).abs() < strip && (&vdist[vorder[k]] - r).abs() < tol {
                        return Err(GeonetError::SpecialRadius(format!(
                            "circle passes near vertex {}",
                            self.vertices[vorder[k]].id
                        )));
                    }
                }
                for (k, df) in emin_f.iter().enumerate() {
                    if (df - rf).abs() < strip && (&egeo[k].d_min - r).abs() < tol {
                        let e = &self.edges[egeo[k].idx];
                        return Err(GeonetError::SpecialRadius(format!(
                            "circle near-tangent to edge {}-{}",
                            e.a, e.b
                        )));
                    }
                }

                // fully inside edges by prefix, strip and crossers exactly
                let cut = emax_f.partition_point(|&d| d < rf - strip);
                let mut lhs = eprefix[cut].clone();
                let mut crossing_sum = ctx.zero();
                for (k, g) in egeo.iter().enumerate() {
                    let near_cut = k >= cut && emax_f[k] < rf + strip;
                    let may_cross = emin_f[k] < rf + strip && emax_f[k] >= rf - strip;
                    if !(near_cut || may_cross) {
                        continue;
                    }
                    if g.d_max < *r {
                        if k >= cut {
                            lhs = &lhs + &g.weighted_len;
                        }
                        continue;
                    }
                    if k < cut {
                        // sorted ordering puts earlier edges inside; with the
                        // strip this cannot trigger, but stay exact
                        lhs = &lhs - &g.weighted_len;
                    }
                    if g.d_min > *r {
                        continue; // fully outside
                    }
                    // crossing edge: exact clip
                    let e = &self.edges[g.idx];
                    let (va, vb) = self.edge_endpoints(e);
                    let m = ctx.int(e.mult as i64);
                    let d = vb.pos.sub(&va.pos);
                    let elen = d.norm();
                    let u = Point::new(&d.x / &elen, &d.y / &elen);
                    let inside = |t: &BigReal| -> bool { va.pos.add(&d.scale(t)).dist(origin) < *r };
                    let ts = segment_circle_params(&va.pos, &vb.pos, origin, r);
                    let mut breaks = vec![ctx.zero()];
                    breaks.extend(ts.iter().cloned());
                    breaks.push(one.clone());
                    for w in breaks.windows(2) {
                        let mid = &(&w[0] + &w[1]) / &two;
                        if inside(&mid) {
                            lhs = &lhs + &(&(&(&w[1] - &w[0]) * &elen) * &m);
                        }
                    }
                    for t in &ts {
                        if t.is_zero() || *t == one {
                            continue;
                        }
                        let pt = va.pos.add(&d.scale(t));
                        let q = pt.sub(origin);
                        let eps = &self.tolerance * &ctx.from_f64(0.5);
                        let after = &(t + &eps).min(&one);
                        let outward = if inside(after) { u.neg() } else { u.clone() };
                        crossing_sum = &crossing_sum + &(&q.dot(&outward) * &m);
                    }
                }

                // vertex term by prefix with an exact strip
                let vcut = vdist_f.partition_point(|&d| d < rf - strip);
                let mut vertex_sum = vprefix[vcut].clone();
                for k in vcut..nv {
                    if vdist_f[k] >= rf + strip {
                        break;
                    }
                    if vdist[vorder[k]] < *r {
                        vertex_sum = &vertex_sum + &vterm[vorder[k]];
                    }
                }

                let rhs = &crossing_sum - &vertex_sum;
                Ok(DiskIdentity {
                    lhs,
                    rhs,
                    crossing_sum,
                    vertex_sum,
                })
            })
            .collect()
    }

    /// Group edges that overlap on a sub-segment of positive length (or carry
    /// multiplicity above one). A non-empty report means the net is a strict
    /// multinet.
    pub fn detect_overlaps(&self) -> OverlapReport {
        let n = self.edges.len();
        let mut dsu = Dsu::new(n);
        let mut flagged = vec![false; n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.mult >= 2 {
                flagged[i] = true;
            }
        }

        // f64 prefilter data
        let segs: Vec<((f64, f64), (f64, f64))> = self
            .edges
            .iter()
            .map(|e| {
                let (va, vb) = self.edge_endpoints(e);
                (va.pos.to_f64(), vb.pos.to_f64())
            })
            .collect();
        let scale_f = self.scale_estimate().to_f64();
        let margin = 1e-9 * scale_f;

        let ang_tol = self.ctx.guard_tolerance();
        let off_tol = self.ctx.guard_tolerance();

        for i in 0..n {
            for j in (i + 1)..n {
                if !prefilter_maybe_collinear(&segs[i], &segs[j], margin) {
                    continue;
                }
                if self.edges_overlap(i, j, &ang_tol, &off_tol) {
                    dsu.union(i, j);
                    flagged[i] = true;
                    flagged[j] = true;
                }
            }
        }

        let mut groups_map: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            groups_map.entry(dsu.find(i)).or_default().push(i);
        }
        let mut groups: Vec<OverlapGroup> = groups_map
            .into_values()
            .filter(|members| members.len() >= 2 || members.iter().any(|&i| flagged[i]))
            .map(|members| {
                let merged = members.iter().map(|&i| self.edges[i].mult).sum();
                OverlapGroup {
                    edges: members,
                    merged_multiplicity: merged,
                }
            })
            .collect();
        groups.sort_by_key(|g| g.edges[0]);
        OverlapReport { groups }
    }

    fn edges_overlap(&self, i: usize, j: usize, ang_tol: &BigReal, off_tol: &BigReal) -> bool {
        let (a1, b1) = self.edge_endpoints(&self.edges[i]);
        let (a2, b2) = self.edge_endpoints(&self.edges[j]);
        let d1 = b1.pos.sub(&a1.pos);
        let d2 = b2.pos.sub(&a2.pos);
        let l1 = d1.norm();
        let l2 = d2.norm();
        let u1 = Point::new(&d1.x / &l1, &d1.y / &l1);
        let u2 = Point::new(&d2.x / &l2, &d2.y / &l2);
        // angular deviation of supporting lines (mod pi)
        if u1.cross(&u2).abs() > *ang_tol {
            return false;
        }
        // perpendicular offset of the other segment's endpoints
        let off_a = u1.cross(&a2.pos.sub(&a1.pos)).abs();
        let off_b = u1.cross(&b2.pos.sub(&a1.pos)).abs();
        let off_lim = off_tol * &l1;
        if off_a > off_lim || off_b > off_lim {
            return false;
        }
        // 1-D overlap of positive length along u1
        let s0 = self.ctx.zero();
        let s1 = l1.clone();
        let t0 = u1.dot(&a2.pos.sub(&a1.pos));
        let t1 = u1.dot(&b2.pos.sub(&a1.pos));
        let (lo2, hi2) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        let lo = s0.max(&lo2);
        let hi = s1.min(&hi2);
        let min_len = l1.min(&l2);
        &hi - &lo > &(&self.tolerance * &min_len) * &self.ctx.int(4)
    }

    pub fn boundary_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Boundary)
            .count()
    }

    pub fn interior_count(&self) -> usize {
        self.vertices.len() - self.boundary_count()
    }
}

#[derive(Clone, Debug)]
pub struct ImbalanceRecord {
    pub vertex: VertexId,
    pub vector: Point,
    pub norm: BigReal,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub residuals: Vec<(VertexId, BigReal)>,
    pub max_interior_residual: BigReal,
    pub unbalanced_interior: Vec<VertexId>,
    pub hull_violations: Vec<(VertexId, BigReal)>,
    pub boundary_boundary_edges: Vec<(VertexId, VertexId)>,
    pub connected: bool,
    /// Balance, hull and connectivity hold.
    pub passes: bool,
}

impl ValidationReport {
    /// True when the net also honors the no-boundary-boundary-edge
    /// convention.
    pub fn convention_ok(&self) -> bool {
        self.boundary_boundary_edges.is_empty()
    }
}

impl ValidationReport {
    pub fn to_json(&self, digits: u32) -> serde_json::Value {
        serde_json::json!({
            "passes": self.passes,
            "connected": self.connected,
            "max_interior_residual": self.max_interior_residual.to_dec_string_digits(digits),
            "unbalanced_interior": self.unbalanced_interior.iter().map(|v| v.0.clone()).collect::<Vec<_>>(),
            "hull_violations": self.hull_violations.iter()
                .map(|(v, e)| serde_json::json!({"id": v.0, "excess": e.to_dec_string_digits(digits)}))
                .collect::<Vec<_>>(),
            "boundary_boundary_edges": self.boundary_boundary_edges.iter()
                .map(|(a, b)| serde_json::json!([a.0, b.0])).collect::<Vec<_>>(),
            "residuals": self.residuals.iter()
                .map(|(v, r)| serde_json::json!({"id": v.0, "residual": r.to_dec_string_digits(digits)}))
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiskIdentity {
    pub lhs: BigReal,
    pub rhs: BigReal,
    pub crossing_sum: BigReal,
    pub vertex_sum: BigReal,
}

#[derive(Clone, Debug)]
pub struct OverlapGroup {
    /// Indices into the net's edge list.
    pub edges: Vec<usize>,
    pub merged_multiplicity: u64,
}

#[derive(Clone, Debug, Default)]
pub struct OverlapReport {
    pub groups: Vec<OverlapGroup>,
}

impl OverlapReport {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn to_json(&self, net: &PlanarNet) -> serde_json::Value {
        serde_json::json!({
            "is_multinet": !self.is_empty(),
            "groups": self.groups.iter().map(|g| serde_json::json!({
                "merged_multiplicity": g.merged_multiplicity,
                "edges": g.edges.iter().map(|&i| {
                    let e = &net.edges()[i];
                    serde_json::json!([e.a.0, e.b.0, e.mult])
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn prefilter_maybe_collinear(
    s1: &((f64, f64), (f64, f64)),
    s2: &((f64, f64), (f64, f64)),
    margin: f64,
) -> bool {
    let (a1, b1) = s1;
    let (a2, b2) = s2;
    // bounding boxes must come close
    let (min1x, max1x) = (a1.0.min(b1.0), a1.0.max(b1.0));
    let (min1y, max1y) = (a1.1.min(b1.1), a1.1.max(b1.1));
    let (min2x, max2x) = (a2.0.min(b2.0), a2.0.max(b2.0));
    let (min2y, max2y) = (a2.1.min(b2.1), a2.1.max(b2.1));
    if min1x > max2x + margin || min2x > max1x + margin || min1y > max2y + margin || min2y > max1y + margin {
        return false;
    }
    let d1 = (b1.0 - a1.0, b1.1 - a1.1);
    let d2 = (b2.0 - a2.0, b2.1 - a2.1);
    let l1 = d1.0.hypot(d1.1);
    let l2 = d2.0.hypot(d2.1);
    if l1 == 0.0 || l2 == 0.0 {
        return true; // let the exact path decide
    }
    let sin = (d1.0 * d2.1 - d1.1 * d2.0).abs() / (l1 * l2);
    if sin > 1e-7 {
        return false;
    }
    // perpendicular offsets
    let off = |p: (f64, f64)| ((p.0 - a1.0) * d1.1 - (p.1 - a1.1) * d1.0).abs() / l1;
    off(*a2).min(off(*b2)) <= margin.max(1e-7 * l1)
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

// ---------------------------------------------------------------------------
// JSON serialization (all coordinates as decimal strings)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: String,
    x: String,
    y: String,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    a: String,
    b: String,
    mult: u64,
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    digits: u32,
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
}

impl PlanarNet {
    pub fn to_json_string(&self) -> String {
        let out = NetJson {
            digits: self.ctx.digits(),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson {
                    id: v.id.0.clone(),
                    x: v.pos.x.to_dec_string(),
                    y: v.pos.y.to_dec_string(),
                    kind: match v.kind {
                        VertexKind::Boundary => "boundary".to_string(),
                        VertexKind::Interior => "interior".to_string(),
                    },
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    a: e.a.0.clone(),
                    b: e.b.0.clone(),
                    mult: e.mult,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("net serialization")
    }

    pub fn from_json_str(s: &str) -> Result<PlanarNet> {
        let parsed: NetJson = serde_json::from_str(s)?;
        let ctx = Ctx::new(parsed.digits);
        let mut net = PlanarNet::new(ctx);
        for v in parsed.vertices {
            let kind = match v.kind.as_str() {
                "boundary" => VertexKind::Boundary,
                "interior" => VertexKind::Interior,
                other => {
                    return Err(GeonetError::Precondition(format!(
                        "unknown vertex kind {other:?}"
                    )))
                }
            };
            let pos = Point::new(ctx.parse(&v.x)?, ctx.parse(&v.y)?);
            net.add_vertex(v.id, pos, kind)?;
        }
        for e in parsed.edges {
            net.add_edge(e.a, e.b, e.mult)?;
        }
        Ok(net)
    }
}
