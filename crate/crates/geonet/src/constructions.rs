//! Geometric construction primitives (suspension, winging, Fermat points)
//! and generators for the concrete example nets and multinets.

use crate::bigreal::{BigReal, Ctx};
use crate::error::{GeonetError, Result};
use crate::geometry::{angle_between, circumcircle, ray_intersect, Point};
use crate::netcore::{PlanarNet, VertexId, VertexKind};

/// Fermat point of a triangle, with the auxiliary construction data.
#[derive(Clone, Debug)]
pub struct FermatResult {
    pub point: Point,
    /// Apex of the external equilateral triangle on the hook segment.
    pub apex: Point,
    pub circle_center: Point,
    pub circle_radius: BigReal,
}

/// Outcome of winging a degree-2 or degree-3 vertex.
#[derive(Clone, Debug)]
pub struct WingResult {
    pub outgoing: [Point; 2],
    /// Vertex degree after winging.
    pub degree: u32,
    /// Smaller angle between the two wings (radians).
    pub beta: BigReal,
}

/// Fermat point of triangle `P v Q` by the apex/circumcircle construction:
/// `X` is the apex of the external equilateral triangle on `PQ`, and the
/// point is the second intersection of segment `Xv` with the circle through
/// `P`, `Q`, `X`.
pub fn fermat_point_two_hook(ctx: Ctx, p: &Point, q: &Point, v: &Point) -> Result<FermatResult> {
    let guard = ctx.guard_tolerance();
    let limit = &ctx.pi_frac(2, 3) - &guard;
    for (corner, o1, o2) in [(v, p, q), (p, q, v), (q, v, p)] {
        let a = angle_between(&o1.sub(corner), &o2.sub(corner));
        if a >= limit {
            return Err(GeonetError::Precondition(format!(
                "triangle angle {} deg >= 120 deg; no interior Fermat point",
                a.to_dec_string_digits(6)
            )));
        }
    }
    let apex = equilateral_apex_away_from(ctx, p, q, v)?;
    let (center, radius) = circumcircle(p, q, &apex)?;
    // line apex -> v hits the circle at apex (t = 0) and at the Fermat point
    let d = v.sub(&apex);
    let f = apex.sub(&center);
    let qa = d.dot(&d);
    let qb = &f.dot(&d) + &f.dot(&d);
    if qa.is_zero() {
        return Err(GeonetError::Precondition("degenerate apex-vertex segment".into()));
    }
    let t = -(&qb / &qa);
    if !t.is_positive() {
        return Err(GeonetError::Precondition(
            "apex-vertex segment does not re-enter the circle".into(),
        ));
    }
    let point = apex.add(&d.scale(&t));
    Ok(FermatResult {
        point,
        apex,
        circle_center: center,
        circle_radius: radius,
    })
}

/// Apex of the equilateral triangle on `pq`, on the side away from `v`.
fn equilateral_apex_away_from(ctx: Ctx, p: &Point, q: &Point, v: &Point) -> Result<Point> {
    let mid = p.add(q).scale(&ctx.ratio(1, 2));
    let pq = q.sub(p);
    let h = &(&ctx.int(3).sqrt() / &ctx.int(2)) * &pq.norm();
    let n = pq.perp().unit()?;
    let cand = mid.add(&n.scale(&h));
    if cand.sub(&mid).dot(&v.sub(&mid)).is_positive() {
        Ok(mid.sub(&n.scale(&h)))
    } else {
        Ok(cand)
    }
}

#[derive(Clone, Debug)]
pub struct MedianResult {
    pub point: Point,
    /// Index of the input point when the minimizer is one of the inputs.
    pub at_vertex: Option<usize>,
    pub iterations: usize,
}

/// Geometric median (Fermat point of a point set) by damped Weiszfeld
/// iteration with vertex snapping.
pub fn geometric_median(ctx: Ctx, points: &[Point]) -> Result<MedianResult> {
    if points.len() < 3 {
        return Err(GeonetError::Precondition("need at least 3 points".into()));
    }
    let mut scale = ctx.zero();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            scale = scale.max(&points[i].dist(&points[j]));
        }
    }
    if scale.is_zero() {
        return Err(GeonetError::Precondition("all points coincident".into()));
    }
    let snap = &ctx.default_tolerance() * &scale;
    let objective = |x: &Point| -> BigReal {
        let mut s = ctx.zero();
        for a in points {
            s = &s + &x.dist(a);
        }
        s
    };

    // start at the centroid
    let mut x = Point::origin(ctx);
    for a in points {
        x = x.add(a);
    }
    x = x.scale(&ctx.ratio(1, points.len() as i64));
    let mut fx = objective(&x);

    let max_iter = 600 + 20 * ctx.digits() as usize;
    let one = ctx.one();
    for iter in 0..max_iter {
        // vertex handling: pull norm at a coincident input point
        let near = points.iter().position(|a| x.dist(a) < snap);
        if let Some(i) = near {
            let mut pull = Point::origin(ctx);
            let mut inv_sum = ctx.zero();
            for (j, a) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = a.sub(&points[i]);
                let n = d.norm();
                pull = pull.add(&d.scale(&n.recip()));
                inv_sum = &inv_sum + &n.recip();
            }
            let r = pull.norm();
            if r <= &one + &ctx.default_tolerance() {
                return Ok(MedianResult {
                    point: points[i].clone(),
                    at_vertex: Some(i),
                    iterations: iter,
                });
            }
            // push off the vertex along the net pull direction
            let step = &(&r - &one) / &inv_sum;
            x = points[i].add(&pull.unit()?.scale(&step));
            fx = objective(&x);
            continue;
        }
        // Weiszfeld reweighting, damped by halving on objective increase
        let mut num = Point::origin(ctx);
        let mut den = ctx.zero();
        for a in points {
            let w = x.dist(a).recip();
            num = num.add(&a.scale(&w));
            den = &den + &w;
        }
        let target = num.scale(&den.recip());
        let mut step = target.sub(&x);
        let mut accepted = false;
        for _ in 0..60 {
            let cand = x.add(&step);
            let fc = objective(&cand);
            if fc <= fx {
                let moved = step.norm();
                x = cand;
                fx = fc;
                accepted = true;
                if moved < snap {
                    return Ok(finish_median(ctx, points, x, &snap, iter + 1));
                }
                break;
            }
            step = step.scale(&ctx.ratio(1, 2));
        }
        if !accepted {
            return Ok(finish_median(ctx, points, x, &snap, iter + 1));
        }
    }
    Ok(finish_median(ctx, points, x, &snap, max_iter))
}

/// Converged iterate: decide whether the minimizer is an input point by the
/// subgradient condition at the nearest one.
fn finish_median(ctx: Ctx, points: &[Point], x: Point, snap: &BigReal, iterations: usize) -> MedianResult {
    let radius = snap * &ctx.int(8);
    let near = points.iter().position(|a| x.dist(a) < radius);
    if let Some(i) = near {
        let mut pull = Point::origin(ctx);
        for (j, a) in points.iter().enumerate() {
            if j != i {
                let d = a.sub(&points[i]);
                pull = pull.add(&d.scale(&d.norm().recip()));
            }
        }
        if pull.norm() <= &ctx.one() + &ctx.default_tolerance() {
            return MedianResult {
                point: points[i].clone(),
                at_vertex: Some(i),
                iterations,
            };
        }
    }
    MedianResult {
        point: x,
        at_vertex: None,
        iterations,
    }
}

/// Wing a degree-2 vertex: extend both incident edges through the vertex.
/// `d1`, `d2` are unit directions toward the existing neighbours; the larger
/// angle between the incident edges must lie strictly in `(pi, 2pi)`.
pub fn wing_degree2(ctx: Ctx, d1: &Point, d2: &Point) -> Result<WingResult> {
    let theta = angle_between(d1, d2);
    let guard = ctx.guard_tolerance();
    if (&ctx.pi() - &theta).abs() < guard {
        return Err(GeonetError::Precondition(
            "incident edges are antipodal; winging a degree-2 vertex needs alpha > pi".into(),
        ));
    }
    if theta < guard {
        return Err(GeonetError::Precondition("incident edges coincide".into()));
    }
    Ok(WingResult {
        outgoing: [d1.neg(), d2.neg()],
        degree: 4,
        beta: theta,
    })
}

/// Wing a degree-3 vertex: the unique unordered pair of unit vectors whose
/// sum cancels the imbalance of the three incident directions.
pub fn wing_degree3(ctx: Ctx, dirs: &[Point; 3]) -> Result<WingResult> {
    let imb = dirs[0].add(&dirs[1]).add(&dirs[2]);
    let b = imb.norm();
    let guard = ctx.guard_tolerance();
    if b >= &ctx.int(2) - &guard {
        return Err(GeonetError::Precondition(format!(
            "imbalance {} >= 2; no unit-pair decomposition",
            b.to_dec_string_digits(6)
        )));
    }
    // the unordered pair is unique for b > 0; at b = 0 any antipodal pair
    // works, and the limit of the generic construction is perpendicular to
    // the third (suspension) direction
    if b < ctx.default_tolerance() {
        let w1 = dirs[2].perp().unit()?;
        let w2 = w1.neg();
        return Ok(WingResult {
            outgoing: [w1, w2],
            degree: 5,
            beta: ctx.pi(),
        });
    }
    let u = imb.scale(&b.recip().neg());
    let half = &b / &ctx.int(2);
    let eta = half.clamp(&ctx.int(-1), &ctx.one()).acos();
    let (c, s) = (eta.cos(), eta.sin());
    let w1 = u.rotate_cs(&c, &s);
    let w2 = u.rotate_cs(&c, &s.neg());
    for w in [&w1, &w2] {
        for d in dirs.iter() {
            if angle_between(w, d) < guard {
                return Err(GeonetError::Precondition(
                    "wing coincides with an incoming edge".into(),
                ));
            }
        }
    }
    let beta = &eta + &eta;
    Ok(WingResult {
        outgoing: [w1, w2],
        degree: 5,
        beta,
    })
}

/// Balance an unbalanced vertex by adding new unit-direction edges whose
/// vectors sum to the negated imbalance. Adds `max(3, ceil(b) + 1)` edges to
/// fresh boundary endpoints and returns their ids. A balanced vertex is left
/// untouched.
pub fn rebalance_vertex(net: &mut PlanarNet, v: &VertexId) -> Result<Vec<VertexId>> {
    let ctx = net.ctx();
    let rec = net.imbalance(v)?;
    if rec.norm <= *net.tolerance() {
        return Ok(Vec::new());
    }
    let b = rec.norm.clone();
    let n = {
        let bf = b.to_f64();
        (bf.ceil() as i64 + 1).max(3) as usize
    };
    let u = rec.vector.scale(&b.recip().neg());

    // existing edge directions at v
    let vpos = net.vertex(v)?.pos.clone();
    let mut existing: Vec<Point> = Vec::new();
    for e in net.edges() {
        let other = if &e.a == v {
            Some(&e.b)
        } else if &e.b == v {
            Some(&e.a)
        } else {
            None
        };
        if let Some(o) = other {
            existing.push(net.vertex(o)?.pos.sub(&vpos).unit()?);
        }
    }

    // fixed fan of n-3 vectors symmetric about u, plus one scanned vector and
    // a solved unit pair
    let fan = build_symmetric_fan(ctx, &u, n.saturating_sub(3));
    let mut fan_sum = Point::origin(ctx);
    for f in &fan {
        fan_sum = fan_sum.add(f);
    }
    let residual_base = u.scale(&b).sub(&fan_sum);

    let grid = 720usize;
    let two = ctx.int(2);
    let mut best: Option<(BigReal, Vec<Point>)> = None;
    for j in 0..grid {
        let t = &ctx.two_pi() * &ctx.ratio(j as i64, grid as i64);
        let v3 = u.rotate(&t);
        let w = residual_base.sub(&v3);
        let wn = w.norm();
        if wn >= &two - &ctx.guard_tolerance() || wn < ctx.guard_tolerance() {
            continue;
        }
        let wu = w.scale(&wn.recip());
        let eta = (&wn / &two).clamp(&ctx.int(-1), &ctx.one()).acos();
        let (c, s) = (eta.cos(), eta.sin());
        let mut cand = fan.clone();
        cand.push(v3);
        cand.push(wu.rotate_cs(&c, &s));
        cand.push(wu.rotate_cs(&c, &s.neg()));
        // minimum angular gap between new directions and existing edges,
        // and among the new directions themselves
        let mut min_gap: Option<BigReal> = None;
        for (i, a) in cand.iter().enumerate() {
            for e in &existing {
                let g = angle_between(a, e);
                min_gap = Some(match min_gap {
                    None => g.clone(),
                    Some(m) => m.min(&g),
                });
            }
            for bdir in cand.iter().skip(i + 1) {
                let g = angle_between(a, bdir);
                min_gap = Some(match min_gap {
                    None => g.clone(),
                    Some(m) => m.min(&g),
                });
            }
        }
        let score = min_gap.unwrap_or_else(|| ctx.pi());
        if best.as_ref().map(|(s0, _)| score > *s0).unwrap_or(true) {
            best = Some((score, cand));
        }
    }
    let (score, dirs) = best.ok_or_else(|| {
        GeonetError::Precondition("no feasible rebalancing directions in the solution family".into())
    })?;
    if score < ctx.guard_tolerance() {
        return Err(GeonetError::Precondition(
            "cannot avoid coincidence with existing edges".into(),
        ));
    }

    let mut ids = Vec::new();
    for (k, d) in dirs.iter().enumerate() {
        let id = VertexId(format!("{}-bal{}", v.0, k));
        let pos = vpos.add(d);
        net.add_vertex(id.clone(), pos, VertexKind::Boundary)?;
        net.add_edge(v.clone(), id.clone(), 1)?;
        ids.push(id);
    }
    Ok(ids)
}

fn build_symmetric_fan(ctx: Ctx, u: &Point, count: usize) -> Vec<Point> {
    if count == 0 {
        return Vec::new();
    }
    let spread = ctx.pi_frac(1, 2 * (count as i64 + 1));
    let mut out = Vec::with_capacity(count);
    let offset = |k: i64| -> BigReal { &spread * &ctx.ratio(2 * k - (count as i64 - 1), 2) };
    for k in 0..count {
        out.push(u.rotate(&offset(k as i64)));
    }
    out
}

// ---------------------------------------------------------------------------
// Example generators
// ---------------------------------------------------------------------------

/// Y-shaped net: three boundary points and one balanced vertex at their
/// Fermat point. Errors when the Fermat point sits at a vertex.
pub fn build_y_net(ctx: Ctx, pts: &[Point; 3]) -> Result<PlanarNet> {
    let med = geometric_median(ctx, pts)?;
    if med.at_vertex.is_some() {
        return Err(GeonetError::Precondition(
            "an angle is >= 120 degrees; the Fermat point is a triangle vertex".into(),
        ));
    }
    let mut net = PlanarNet::new(ctx);
    net.add_vertex("o", med.point, VertexKind::Interior)?;
    for (k, p) in pts.iter().enumerate() {
        net.add_vertex(format!("a{k}"), p.clone(), VertexKind::Boundary)?;
        net.add_edge("o", format!("a{k}"), 1)?;
    }
    Ok(net)
}

/// Equilateral-triangle Y-net with unit circumradius.
pub fn build_y_net_equilateral(ctx: Ctx) -> PlanarNet {
    let pts = [0i64, 1, 2].map(|k| {
        let a = ctx.pi_frac(2 * k, 3);
        Point::new(a.cos(), a.sin())
    });
    build_y_net(ctx, &pts).expect("equilateral triangle has an interior Fermat point")
}

/// Spec of the weighted-triangle multinet family: three rational cosines
/// `cos(alpha_i / 2) = m_i / n_i` and nesting ratios `0 < r_1 < ... < r_k < 1`.
#[derive(Clone, Debug)]
pub struct WeightedTriangleSpec {
    pub cos_half: [(u64, u64); 3],
    pub ratios: Vec<BigReal>,
}

impl WeightedTriangleSpec {
    /// The 5-12-13 example: `cos(alpha/2) = 12/13` twice, `120/169` for the
    /// third angle, with `k` evenly spaced nesting ratios.
    pub fn pythagorean_5_12_13(ctx: Ctx, k: usize) -> WeightedTriangleSpec {
        let ratios = (1..=k)
            .map(|j| ctx.ratio(j as i64, k as i64 + 1))
            .collect();
        WeightedTriangleSpec {
            cos_half: [(12, 13), (12, 13), (120, 169)],
            ratios,
        }
    }

    pub fn angles(&self, ctx: Ctx) -> [BigReal; 3] {
        self.cos_half
            .map(|(m, n)| &ctx.int(2) * &ctx.ratio(m as i64, n as i64).acos())
    }

    /// Derived integer weights `(N, [N_1, N_2, N_3])`.
    pub fn weights(&self) -> (u64, [u64; 3]) {
        let n: u64 = self.cos_half.iter().map(|&(_, d)| d).product();
        let ws = self.cos_half.map(|(m, d)| m * (n / d));
        (n, ws)
    }

    pub fn check(&self, ctx: Ctx) -> Result<()> {
        for &(m, n) in &self.cos_half {
            if m == 0 || m >= n {
                return Err(GeonetError::Precondition(format!(
                    "cos(alpha/2) = {m}/{n} must lie in (0, 1)"
                )));
            }
        }
        let angles = self.angles(ctx);
        let sum = &(&angles[0] + &angles[1]) + &angles[2];
        if (&sum - &ctx.pi()).abs() > ctx.default_tolerance() {
            return Err(GeonetError::Precondition(
                "triangle angles do not sum to pi".into(),
            ));
        }
        let mut last = ctx.zero();
        for r in &self.ratios {
            if !(*r > last && *r < ctx.one()) {
                return Err(GeonetError::Precondition(
                    "ratios must be strictly increasing in (0, 1)".into(),
                ));
            }
            last = r.clone();
        }
        Ok(())
    }
}

/// Weighted-triangle geodesic multinet: `k` nested homothetic triangles with
/// integer edge weights making every nested vertex balanced.
pub fn build_weighted_triangle(ctx: Ctx, spec: &WeightedTriangleSpec) -> Result<PlanarNet> {
    spec.check(ctx)?;
    let angles = spec.angles(ctx);
    let (n_weight, side_weights) = spec.weights();
    let k = spec.ratios.len();

    // place the triangle: A1 at origin, A2 on the x-axis, A3 above
    let sin3 = angles[2].sin();
    let len12 = ctx.one();
    let len13 = &(&len12 * &angles[1].sin()) / &sin3;
    let a1 = Point::origin(ctx);
    let a2 = Point::new(len12, ctx.zero());
    let a3 = Point::new(&len13 * &angles[0].cos(), &len13 * &angles[0].sin());
    let corners = [a1, a2, a3];

    // incenter: weighted by opposite side lengths
    let opp = [
        corners[1].dist(&corners[2]),
        corners[2].dist(&corners[0]),
        corners[0].dist(&corners[1]),
    ];
    let per = &(&opp[0] + &opp[1]) + &opp[2];
    let mut center = Point::origin(ctx);
    for i in 0..3 {
        center = center.add(&corners[i].scale(&opp[i]));
    }
    center = center.scale(&per.recip());

    let mut net = PlanarNet::new(ctx);
    for (i, c) in corners.iter().enumerate() {
        net.add_vertex(format!("A{}", i + 1), c.clone(), VertexKind::Boundary)?;
    }
    for (j, r) in spec.ratios.iter().enumerate() {
        for (i, c) in corners.iter().enumerate() {
            let p = center.add(&c.sub(&center).scale(r));
            net.add_vertex(format!("A{}_{}", i + 1, j + 1), p, VertexKind::Interior)?;
        }
    }
    // radial edges with weights 2 j N_i
    for i in 1..=3usize {
        for j in 1..=k {
            let from = format!("A{i}_{j}");
            let to = if j == k {
                format!("A{i}")
            } else {
                format!("A{i}_{}", j + 1)
            };
            net.add_edge(from, to, 2 * j as u64 * side_weights[i - 1])?;
        }
    }
    // nested triangle sides with weight N
    for j in 1..=k {
        for i in 0..3usize {
            let a = format!("A{}_{}", i + 1, j);
            let b = format!("A{}_{}", (i + 1) % 3 + 1, j);
            net.add_edge(a, b, n_weight)?;
        }
    }
    Ok(net)
}

/// Union of a regular N-gon with its copy rotated by `pi / (2N)`, with the
/// 2N side crossings materialized as balanced degree-4 vertices.
pub fn build_double_polygon(ctx: Ctx, n: usize) -> Result<PlanarNet> {
    if n < 3 {
        return Err(GeonetError::Precondition("polygon needs n >= 3".into()));
    }
    let mut net = PlanarNet::new(ctx);
    let vert_angle = |k: i64, off: i64| -> BigReal {
        // angles in units of pi / (2n): vertices at 4k and 4k+1
        ctx.pi_frac(4 * k + off, 2 * n as i64)
    };
    let pos = |ang: &BigReal| Point::new(ang.cos(), ang.sin());
    for k in 0..n {
        let a = vert_angle(k as i64, 0);
        net.add_vertex(format!("W{k}"), pos(&a), VertexKind::Boundary)?;
        let b = vert_angle(k as i64, 1);
        net.add_vertex(format!("U{k}"), pos(&b), VertexKind::Boundary)?;
    }
    // crossing of side W_k W_{k+1} with U-side starting at U_j
    let w_side = |k: usize| -> (Point, Point) {
        let a = vert_angle(k as i64, 0);
        let b = vert_angle(k as i64 + 1, 0);
        (pos(&a), pos(&b))
    };
    let u_side = |k: usize| -> (Point, Point) {
        let a = vert_angle(k as i64, 1);
        let b = vert_angle(k as i64 + 1, 1);
        (pos(&a), pos(&b))
    };
    for k in 0..n {
        // C1_k: crossing with the U-side ending near W_k; C2_k: near W_{k+1}
        let (wa, wb) = w_side(k);
        let prev = (k + n - 1) % n;
        let (ua, ub) = u_side(prev);
        let (p1, _, _) = ray_intersect(&wa, &wb.sub(&wa), &ua, &ub.sub(&ua))?;
        net.add_vertex(format!("C1_{k}"), p1, VertexKind::Interior)?;
        let (ua, ub) = u_side(k);
        let (p2, _, _) = ray_intersect(&wa, &wb.sub(&wa), &ua, &ub.sub(&ua))?;
        net.add_vertex(format!("C2_{k}"), p2, VertexKind::Interior)?;
    }
    for k in 0..n {
        let next = (k + 1) % n;
        net.add_edge(format!("W{k}"), format!("C1_{k}"), 1)?;
        net.add_edge(format!("C1_{k}"), format!("C2_{k}"), 1)?;
        net.add_edge(format!("C2_{k}"), format!("W{next}"), 1)?;
        net.add_edge(format!("U{k}"), format!("C2_{k}"), 1)?;
        net.add_edge(format!("C2_{k}"), format!("C1_{next}"), 1)?;
        net.add_edge(format!("C1_{next}"), format!("U{next}"), 1)?;
    }
    Ok(net)
}

/// The nets on four boundary points: the X-shaped net through the diagonal
/// crossing, and the two-balanced-vertex Steiner trees for both side
/// pairings (when feasible).
#[derive(Debug)]
pub struct FourPointNets {
    pub x_net: PlanarNet,
    pub trees: Vec<PlanarNet>,
    /// Human-readable reasons for pairings that admit no tree.
    pub infeasible: Vec<String>,
}

/// `quad` must list the vertices of a convex quadrilateral in cyclic order.
pub fn build_four_point_trees(ctx: Ctx, quad: &[Point; 4]) -> Result<FourPointNets> {
    // convexity in the given cyclic order
    for i in 0..4 {
        let a = &quad[i];
        let b = &quad[(i + 1) % 4];
        let c = &quad[(i + 2) % 4];
        if !b.sub(a).cross(&c.sub(b)).is_positive() {
            return Err(GeonetError::Precondition(
                "quadrilateral must be convex and counterclockwise".into(),
            ));
        }
    }

    let (cross, t, s) = ray_intersect(&quad[0], &quad[2].sub(&quad[0]), &quad[1], &quad[3].sub(&quad[1]))?;
    debug_assert!(t.is_positive() && s.is_positive());
    let mut x_net = PlanarNet::new(ctx);
    x_net.add_vertex("o", cross, VertexKind::Interior)?;
    for (k, p) in quad.iter().enumerate() {
        x_net.add_vertex(format!("a{k}"), p.clone(), VertexKind::Boundary)?;
        x_net.add_edge("o", format!("a{k}"), 1)?;
    }

    let mut trees = Vec::new();
    let mut infeasible = Vec::new();
    for pairing in 0..2usize {
        // sides (i, i+1) and (i+2, i+3)
        let i = pairing;
        let (a, b) = (&quad[i], &quad[(i + 1) % 4]);
        let (c, d) = (&quad[(i + 2) % 4], &quad[(i + 3) % 4]);
        match melzak_tree(ctx, a, b, c, d) {
            Ok((o1, o2)) => {
                let mut net = PlanarNet::new(ctx);
                net.add_vertex("o1", o1, VertexKind::Interior)?;
                net.add_vertex("o2", o2, VertexKind::Interior)?;
                net.add_vertex("a", a.clone(), VertexKind::Boundary)?;
                net.add_vertex("b", b.clone(), VertexKind::Boundary)?;
                net.add_vertex("c", c.clone(), VertexKind::Boundary)?;
                net.add_vertex("d", d.clone(), VertexKind::Boundary)?;
                net.add_edge("o1", "a", 1)?;
                net.add_edge("o1", "b", 1)?;
                net.add_edge("o1", "o2", 1)?;
                net.add_edge("o2", "c", 1)?;
                net.add_edge("o2", "d", 1)?;
                trees.push(net);
            }
            Err(e) => infeasible.push(format!("pairing {pairing}: {e}")),
        }
    }
    Ok(FourPointNets {
        x_net,
        trees,
        infeasible,
    })
}

/// Melzak construction for the tree with Steiner points adjacent to `(a, b)`
/// and `(c, d)` respectively. The quadrilateral `a b c d` is in cyclic order,
/// so sides `ab` and `cd` face each other.
fn melzak_tree(ctx: Ctx, a: &Point, b: &Point, c: &Point, d: &Point) -> Result<(Point, Point)> {
    let mid_ab = a.add(b).scale(&ctx.ratio(1, 2));
    let mid_cd = c.add(d).scale(&ctx.ratio(1, 2));
    let e1 = equilateral_apex_away_from(ctx, a, b, &mid_cd)?;
    let e2 = equilateral_apex_away_from(ctx, c, d, &mid_ab)?;
    let o1 = second_circle_intersection(ctx, a, b, &e1, &e2)?;
    let o2 = second_circle_intersection(ctx, c, d, &e2, &e1)?;
    // both Steiner points must lie strictly between the apexes and be distinct
    let seg = e2.sub(&e1);
    let seg2 = seg.dot(&seg);
    let t1 = &o1.sub(&e1).dot(&seg) / &seg2;
    let t2 = &o2.sub(&e1).dot(&seg) / &seg2;
    let guard = ctx.guard_tolerance();
    if !(t1.is_positive() && t2 < ctx.one() && &t2 - &t1 > guard) {
        return Err(GeonetError::Precondition(
            "Steiner topology infeasible: merged or inverted interior vertices".into(),
        ));
    }
    Ok((o1, o2))
}

/// Second intersection of the segment apex->target with circle(p, q, apex).
fn second_circle_intersection(ctx: Ctx, p: &Point, q: &Point, apex: &Point, target: &Point) -> Result<Point> {
    let (center, _r) = circumcircle(p, q, apex)?;
    let d = target.sub(apex);
    let f = apex.sub(&center);
    let qa = d.dot(&d);
    let qb = &f.dot(&d) + &f.dot(&d);
    if qa.is_zero() {
        return Err(GeonetError::Precondition("degenerate Melzak segment".into()));
    }
    let t = -(&qb / &qa);
    if !t.is_positive() {
        return Err(GeonetError::Precondition(
            "Melzak segment leaves the circle immediately".into(),
        ));
    }
    let _ = ctx;
    Ok(apex.add(&d.scale(&t)))
}
