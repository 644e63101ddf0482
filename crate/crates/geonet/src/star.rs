//! The seven-fold star family: an outer circle of seven pinned vertices, an
//! inner circle placed by the opening angle `alpha0`, and iterated layers
//! built by winging (and, when the incoming angle drops below pi, suspension
//! from the outer circle first). A single deviation angle `phi` breaks the
//! reflection symmetry; the suspension angle of every layer is measured
//! against its hook geometry.
//!
//! Numerically the construction is exponentially sensitive in depth: any
//! asymmetry (physical deviation or roundoff) is amplified by a factor of
//! roughly 4..40 per layer, matching the growth of the derivative sequence.
//! The engine therefore works at `digits + 0.7 * layers + 20` internal
//! digits and rounds results back to the requested precision.

use crate::bigreal::{BigReal, Ctx};
use crate::constructions::{fermat_point_two_hook, wing_degree2, wing_degree3};
use crate::error::{GeonetError, Result};
use crate::geometry::{ccw_angle, point_segment_distance, ray_intersect, signed_angle, Point};
use crate::netcore::{PlanarNet, VertexKind};

#[derive(Clone, Debug)]
pub struct StarConfig {
    pub digits: u32,
    pub layers: usize,
    pub phi: BigReal,
    pub alpha0: BigReal,
}

impl StarConfig {
    /// Parse a configuration; `phi` is a decimal string, `alpha0` a decimal
    /// or `p/q` ratio in radians and must exceed 4 pi / 3.
    pub fn new(digits: u32, layers: usize, phi: &str, alpha0: &str) -> Result<StarConfig> {
        let work = work_ctx(digits, layers);
        let phi = work.parse(phi)?;
        let alpha0 = work.parse_ratio(alpha0)?;
        if alpha0 <= work.pi_frac(4, 3) {
            return Err(GeonetError::Precondition(format!(
                "alpha0 = {} rad must exceed 4 pi / 3 (240 degrees)",
                alpha0.to_dec_string_digits(8)
            )));
        }
        if alpha0 >= work.two_pi() {
            return Err(GeonetError::Precondition("alpha0 must be below 2 pi".into()));
        }
        Ok(StarConfig {
            digits,
            layers,
            phi,
            alpha0,
        })
    }

    /// Non-deviated configuration with the default opening angle 88/21.
    pub fn symmetric(digits: u32, layers: usize) -> StarConfig {
        StarConfig::new(digits, layers, "0", "88/21").expect("default config is valid")
    }

    pub fn work_ctx(&self) -> Ctx {
        work_ctx(self.digits, self.layers)
    }
}

fn work_ctx(digits: u32, layers: usize) -> Ctx {
    Ctx::new(digits + (layers as u32 * 7).div_ceil(10) + 20)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    /// Layer 0, the inner circle.
    Initial,
    /// Winged a degree-2 vertex (incoming angle above pi).
    A,
    /// Two-hook suspension through a Fermat point, then winged (even source).
    B1,
    /// One-hook suspension to the nearest outer vertex, then winged (odd source).
    B2,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Initial => "initial",
            CaseTag::A => "A",
            CaseTag::B1 => "B1",
            CaseTag::B2 => "B2",
        }
    }
}

/// Suspension data for the step that created a layer (case B only).
#[derive(Clone, Debug)]
pub struct SuspensionRecord {
    /// Indices of the outer-circle hooks used (canonical sector).
    pub hooks: Vec<usize>,
    /// Fermat point for two-hook suspension, canonical sector.
    pub fermat: Option<Point>,
    /// Apex of the equilateral triangle over the hooks.
    pub apex: Option<Point>,
}

#[derive(Clone, Debug)]
pub struct LayerRecord {
    pub index: usize,
    /// Case of the construction step that produced this layer.
    pub created_by: CaseTag,
    /// Canonical vertex position (one of seven, the rest by rotation).
    pub canonical: Point,
    /// Incoming edge angle at this layer's vertices, measured through the
    /// sector containing the inward radial direction.
    pub alpha: BigReal,
    /// Wing angle produced when advancing from this layer (set once advanced).
    pub beta: Option<BigReal>,
    /// Distance of the layer vertices from the center.
    pub x: BigReal,
    /// Measured suspension angle of this layer (signed).
    pub phi: BigReal,
    /// Suspension applied to this layer's vertices when advancing from it.
    pub suspension: Option<SuspensionRecord>,
}

/// Canonical-sector edge with metadata for net assembly.
#[derive(Clone, Debug)]
struct CanonEdge {
    a: Point,
    b: Point,
}

#[derive(Clone, Debug)]
struct CanonVertex {
    pos: Point,
    name: String,
}

#[derive(Debug)]
pub struct StarState {
    pub config: StarConfig,
    work: Ctx,
    pub outer_radius: BigReal,
    pub apex_radius: BigReal,
    outer: Vec<Point>,
    pub layers: Vec<LayerRecord>,
    rot_cs: (BigReal, BigReal),
    // canonical chain for the next advance
    canon: Point,
    canon_cw: Point,
    canon_ccw: Point,
    edges: Vec<CanonEdge>,
    fermat_vertices: Vec<CanonVertex>,
}

/// Build the star `G_n(phi)`. Fails with a layer diagnostic when a
/// construction precondition breaks (the feasibility window for `phi`
/// shrinks exponentially with the layer count).
pub fn build_star(config: &StarConfig) -> Result<StarState> {
    let mut st = init_star(config)?;
    for _ in 0..config.layers {
        advance_layer(&mut st)?;
    }
    Ok(st)
}

fn init_star(config: &StarConfig) -> Result<StarState> {
    let ctx = config.work_ctx();
    let a0 = &config.alpha0;
    let half = a0 / &ctx.int(2);
    let pi7 = ctx.pi_frac(1, 7);
    // outer radius normalized so that the inner circle has radius 1 at phi=0
    let outer_radius = &half.sin() / &(&pi7 + &half).sin();
    let apex_radius = &(&ctx.int(2) * &outer_radius) * &(&pi7 + &ctx.pi_frac(1, 6)).sin();
    let rot = ctx.pi_frac(2, 7);
    let rot_cs = (rot.cos(), rot.sin());
    let outer: Vec<Point> = (0..7)
        .map(|k| {
            let a = ctx.pi_frac(2 * k, 7);
            Point::new(&outer_radius * &a.cos(), &outer_radius * &a.sin())
        })
        .collect();

    // inner circle: rotate the apex-to-center segment by phi about the apex,
    // and solve for the point seeing the hooks at the opening angle
    let p = outer[0].clone();
    let q = outer[1].clone();
    let x_apex = Point::new(&apex_radius * &pi7.cos(), &apex_radius * &pi7.sin());
    let dir = x_apex.neg().unit()?.rotate(&config.phi);
    let target = &ctx.two_pi() - a0;
    let angle_at = |t: &BigReal| -> BigReal {
        let v = x_apex.add(&dir.scale(t));
        signed_angle(&p.sub(&v), &q.sub(&v)).abs()
    };
    // bracket between the chord crossing and the far end of the segment
    let (_, t_chord, _) = ray_intersect(&x_apex, &dir, &p, &q.sub(&p))?;
    let mut lo = t_chord.clone();
    let mut hi = x_apex.norm();
    if !(angle_at(&hi) < target) {
        return Err(GeonetError::LayerFailed {
            layer: 0,
            reason: "no inner-circle solution on the rotated segment (phi too large)".into(),
        });
    }
    let bits = ctx.prec_bits() + 16;
    for _ in 0..bits {
        let mid = &(&lo + &hi) / &ctx.int(2);
        if angle_at(&mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v0 = x_apex.add(&dir.scale(&(&(&lo + &hi) / &ctx.int(2))));

    let phi0 = signed_angle(&x_apex.neg(), &v0.sub(&x_apex));
    let alpha0_measured = reflex_incoming_angle(ctx, &v0, &p, &q);
    let layers = vec![LayerRecord {
        index: 0,
        created_by: CaseTag::Initial,
        canonical: v0.clone(),
        alpha: alpha0_measured,
        beta: None,
        x: v0.norm(),
        phi: phi0,
        suspension: None,
    }];

    let edges = vec![
        CanonEdge {
            a: p.clone(),
            b: v0.clone(),
        },
        CanonEdge {
            a: q.clone(),
            b: v0.clone(),
        },
    ];

    Ok(StarState {
        config: config.clone(),
        work: ctx,
        outer_radius,
        apex_radius,
        canon: v0,
        canon_cw: p,
        canon_ccw: q,
        outer,
        layers,
        rot_cs,
        edges,
        fermat_vertices: Vec::new(),
    })
}

/// Incoming angle at `v` between directions to `cw` and `ccw`, measured
/// through the sector containing the inward radial direction.
fn reflex_incoming_angle(ctx: Ctx, v: &Point, cw: &Point, ccw: &Point) -> BigReal {
    let d1 = cw.sub(v);
    let d2 = ccw.sub(v);
    let inward = v.neg();
    let a = ccw_angle(ctx, &d1, &d2);
    let b = ccw_angle(ctx, &d1, &inward);
    if b < a {
        a
    } else {
        &ctx.two_pi() - &a
    }
}

fn advance_layer(st: &mut StarState) -> Result<()> {
    let ctx = st.work;
    let i = st.layers.len() - 1;
    let v = st.canon.clone();
    let d1 = st.canon_cw.sub(&v).unit()?;
    let d2 = st.canon_ccw.sub(&v).unit()?;
    let alpha = st.layers[i].alpha.clone();

    let gap = (&alpha - &ctx.pi()).abs();
    if gap < ctx.guard_tolerance() {
        return Err(GeonetError::DispatchAmbiguous {
            layer: i,
            gap: gap.to_dec_string_digits(6),
        });
    }

    let fail = |reason: String| GeonetError::LayerFailed { layer: i, reason };

    let (wings, beta, case, susp) = if alpha > ctx.pi() {
        let w = wing_degree2(ctx, &d1, &d2).map_err(|e| fail(e.to_string()))?;
        (w.outgoing, w.beta, CaseTag::A, None)
    } else {
        // suspension first; hooks by angular position
        let theta = v.angle().rem_euclid(&ctx.two_pi());
        let sector = (&theta / &ctx.pi_frac(2, 7)).to_f64();
        let (d3, susp) = if i % 2 == 0 {
            let kf = sector.floor() as usize % 7;
            let p = st.outer[kf].clone();
            let q = st.outer[(kf + 1) % 7].clone();
            let f = fermat_point_two_hook(ctx, &p, &q, &v).map_err(|e| fail(e.to_string()))?;
            let d3 = f.point.sub(&v).unit()?;
            st.fermat_vertices.push(CanonVertex {
                pos: f.point.clone(),
                name: format!("F{i}"),
            });
            st.edges.push(CanonEdge {
                a: p,
                b: f.point.clone(),
            });
            st.edges.push(CanonEdge {
                a: q,
                b: f.point.clone(),
            });
            st.edges.push(CanonEdge {
                a: v.clone(),
                b: f.point.clone(),
            });
            (
                d3,
                SuspensionRecord {
                    hooks: vec![kf, (kf + 1) % 7],
                    fermat: Some(f.point),
                    apex: Some(f.apex),
                },
            )
        } else {
            let kn = sector.round() as usize % 7;
            let p = st.outer[kn].clone();
            st.edges.push(CanonEdge {
                a: v.clone(),
                b: p.clone(),
            });
            let d3 = p.sub(&v).unit()?;
            (
                d3,
                SuspensionRecord {
                    hooks: vec![kn],
                    fermat: None,
                    apex: None,
                },
            )
        };
        let w = wing_degree3(ctx, &[d1, d2, d3]).map_err(|e| fail(e.to_string()))?;
        let case = if i % 2 == 0 { CaseTag::B1 } else { CaseTag::B2 };
        (w.outgoing, w.beta, case, Some(susp))
    };

    // classify wings by angular side; they must straddle the radial line
    let c0 = v.cross(&wings[0]);
    let c1 = v.cross(&wings[1]);
    if c0.is_zero() || c1.is_zero() || c0.signum() == c1.signum() {
        return Err(fail("wings do not straddle the radial direction".into()));
    }
    let (w_ccw, w_cw) = if c0.is_positive() {
        (wings[0].clone(), wings[1].clone())
    } else {
        (wings[1].clone(), wings[0].clone())
    };

    // the ccw wing of v meets the cw wing of the rotated copy of v
    let (rc, rs) = (st.rot_cs.0.clone(), st.rot_cs.1.clone());
    let vr = v.rotate_cs(&rc, &rs);
    let wr = w_cw.rotate_cs(&rc, &rs);
    let (next, t1, t2) = ray_intersect(&v, &w_ccw, &vr, &wr).map_err(|e| fail(e.to_string()))?;
    if !t1.is_positive() || !t2.is_positive() {
        return Err(fail(format!(
            "wings fail to intersect inside the sector (t1 = {}, t2 = {})",
            t1.to_dec_string_digits(6),
            t2.to_dec_string_digits(6)
        )));
    }

    st.edges.push(CanonEdge {
        a: v.clone(),
        b: next.clone(),
    });
    st.edges.push(CanonEdge {
        a: vr.clone(),
        b: next.clone(),
    });

    // finalize the source layer
    st.layers[i].beta = Some(beta);
    st.layers[i].suspension = susp;

    let alpha_next = reflex_incoming_angle(ctx, &next, &v, &vr);
    let phi_next = measure_suspension_angle(st, i + 1, &next);
    st.layers.push(LayerRecord {
        index: i + 1,
        created_by: case,
        canonical: next.clone(),
        alpha: alpha_next,
        beta: None,
        x: next.norm(),
        phi: phi_next,
        suspension: None,
    });
    st.canon_cw = v;
    st.canon_ccw = vr;
    st.canon = next;
    Ok(())
}

/// Signed suspension angle of a vertex `v` in layer `index`, measured at the
/// parity-appropriate reference point (apex for even layers, nearest outer
/// vertex for odd ones) from the direction toward the center.
fn measure_suspension_angle(st: &StarState, index: usize, v: &Point) -> BigReal {
    let ctx = st.work;
    let theta = v.angle().rem_euclid(&ctx.two_pi());
    let sector = (&theta / &ctx.pi_frac(2, 7)).to_f64();
    let reference = if index % 2 == 0 {
        let kf = sector.floor() as i64;
        let a = &(&ctx.pi_frac(2, 7) * &ctx.int(kf)) + &ctx.pi_frac(1, 7);
        Point::new(&st.apex_radius * &a.cos(), &st.apex_radius * &a.sin())
    } else {
        let kn = sector.round() as usize % 7;
        st.outer[kn].clone()
    };
    signed_angle(&reference.neg(), &v.sub(&reference))
}

impl StarState {
    pub fn work_ctx(&self) -> Ctx {
        self.work
    }

    pub fn outer_vertices(&self) -> &[Point] {
        &self.outer
    }

    /// Measured suspension angles of all layers, rounded to the configured
    /// precision.
    pub fn suspension_angles(&self) -> Vec<BigReal> {
        self.layers
            .iter()
            .map(|l| l.phi.with_digits(self.config.digits))
            .collect()
    }

    /// Balanced layer vertices in the finished net (all layers except the
    /// newest, seven vertices each).
    pub fn constructed_balanced_count(&self) -> usize {
        7 * (self.layers.len() - 1)
    }

    pub fn fermat_vertex_count(&self) -> usize {
        7 * self.fermat_vertices.len()
    }

    /// Compare measured layer angles and radii against the analytic
    /// recursion (symmetric case only). Returns the maximum deviations.
    pub fn crosscheck_analytic(&self) -> Result<AnalyticCrossCheck> {
        if !self.config.phi.is_zero() {
            return Err(GeonetError::Precondition(
                "analytic recursion applies to the symmetric case only".into(),
            ));
        }
        let n = self.layers.len() - 1;
        let seq = alpha_beta_x_sequences(self.work, &self.config.alpha0, n)?;
        let mut max_alpha = self.work.zero();
        let mut max_x = self.work.zero();
        for (layer, s) in self.layers.iter().zip(seq.iter()) {
            max_alpha = max_alpha.max(&(&layer.alpha - &s.alpha).abs());
            max_x = max_x.max(&(&layer.x - &s.x).abs());
        }
        Ok(AnalyticCrossCheck {
            max_alpha_deviation: max_alpha.with_digits(self.config.digits),
            max_x_deviation: max_x.with_digits(self.config.digits),
        })
    }

    /// Materialize the net: replicate the canonical sector by rotation, then
    /// split edges at pass-through vertices and transversal crossings so the
    /// result is embedded (crossings become balanced degree-4 vertices).
    pub fn to_net(&self) -> Result<PlanarNet> {
        let ctx = self.work;
        let snap = &ctx.default_tolerance() * &self.outer_radius;
        let mut asm = NetAssembler::new(ctx, snap);

        // rotation by k * 2pi/7, each from a fresh angle evaluation
        let rots: Vec<(BigReal, BigReal)> = (0..7)
            .map(|k| {
                let a = ctx.pi_frac(2 * k, 7);
                (a.cos(), a.sin())
            })
            .collect();

        for (j, p) in self.outer.iter().enumerate() {
            asm.add_vertex(p.clone(), VertexKind::Boundary, format!("P{j}"));
        }
        let last = self.layers.len() - 1;
        for (k, (c, s)) in rots.iter().enumerate() {
            for layer in &self.layers {
                let kind = if layer.index == last {
                    VertexKind::Boundary
                } else {
                    VertexKind::Interior
                };
                asm.add_vertex(
                    layer.canonical.rotate_cs(c, s),
                    kind,
                    format!("L{}_{}", layer.index, k),
                );
            }
            for fv in &self.fermat_vertices {
                asm.add_vertex(
                    fv.pos.rotate_cs(c, s),
                    VertexKind::Interior,
                    format!("{}_{}", fv.name, k),
                );
            }
        }
        for (c, s) in rots.iter() {
            for e in &self.edges {
                asm.add_edge(e.a.rotate_cs(c, s), e.b.rotate_cs(c, s))?;
            }
        }

        asm.materialize_incidences()?;
        asm.into_net(self.config.digits)
    }

    /// Per-layer report rows as JSON-ready values.
    pub fn layer_report(&self) -> serde_json::Value {
        let d = self.config.digits;
        serde_json::Value::Array(
            self.layers
                .iter()
                .map(|l| {
                    serde_json::json!({
                        "index": l.index,
                        "case": l.created_by.as_str(),
                        "alpha": l.alpha.to_dec_string_digits(d),
                        "beta": l.beta.as_ref().map(|b| b.to_dec_string_digits(d)),
                        "x": l.x.to_dec_string_digits(d),
                        "phi": l.phi.to_dec_string_digits(d),
                        "hooks": l.suspension.as_ref().map(|s| s.hooks.clone()),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct AnalyticCrossCheck {
    pub max_alpha_deviation: BigReal,
    pub max_x_deviation: BigReal,
}

// ---------------------------------------------------------------------------
// Net assembly with snapping, identical-edge merging and crossing splits
// ---------------------------------------------------------------------------

struct NetAssembler {
    ctx: Ctx,
    snap: BigReal,
    positions: Vec<Point>,
    kinds: Vec<VertexKind>,
    names: Vec<String>,
    buckets: std::collections::HashMap<(i64, i64), Vec<usize>>,
    bucket_size: f64,
    edges: std::collections::HashMap<(usize, usize), u64>,
    crossing_counter: usize,
}

impl NetAssembler {
    fn new(ctx: Ctx, snap: BigReal) -> NetAssembler {
        NetAssembler {
            ctx,
            snap,
            positions: Vec::new(),
            kinds: Vec::new(),
            names: Vec::new(),
            buckets: std::collections::HashMap::new(),
            bucket_size: 1e-6,
            edges: std::collections::HashMap::new(),
            crossing_counter: 0,
        }
    }

    fn bucket_of(&self, p: &Point) -> (i64, i64) {
        let (x, y) = p.to_f64();
        (
            (x / self.bucket_size).floor() as i64,
            (y / self.bucket_size).floor() as i64,
        )
    }

    fn lookup(&self, p: &Point) -> Option<usize> {
        let (bx, by) = self.bucket_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.buckets.get(&(bx + dx, by + dy)) {
                    for &i in list {
                        if self.positions[i].dist(p) < self.snap {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Insert or merge a vertex; merging keeps the first name and upgrades
    /// Boundary kind over Interior.
    fn add_vertex(&mut self, p: Point, kind: VertexKind, name: String) -> usize {
        if let Some(i) = self.lookup(&p) {
            if kind == VertexKind::Boundary {
                self.kinds[i] = VertexKind::Boundary;
            }
            return i;
        }
        let i = self.positions.len();
        let key = self.bucket_of(&p);
        self.positions.push(p);
        self.kinds.push(kind);
        self.names.push(name);
        self.buckets.entry(key).or_default().push(i);
        i
    }

    fn add_edge(&mut self, a: Point, b: Point) -> Result<()> {
        let ia = self.lookup(&a).ok_or_else(|| {
            GeonetError::Precondition("edge endpoint is not a registered vertex".into())
        })?;
        let ib = self.lookup(&b).ok_or_else(|| {
            GeonetError::Precondition("edge endpoint is not a registered vertex".into())
        })?;
        if ia == ib {
            return Err(GeonetError::Precondition("degenerate canonical edge".into()));
        }
        let key = (ia.min(ib), ia.max(ib));
        *self.edges.entry(key).or_insert(0) += 1;
        Ok(())
    }

    /// Split edges at vertices they pass through and at transversal
    /// crossings, creating balanced degree-4 crossing vertices.
    fn materialize_incidences(&mut self) -> Result<()> {
        let edge_list: Vec<((usize, usize), u64)> = {
            let mut v: Vec<_> = self.edges.iter().map(|(&k, &m)| (k, m)).collect();
            v.sort();
            v
        };
        let nedges = edge_list.len();
        let segs_f64: Vec<((f64, f64), (f64, f64))> = edge_list
            .iter()
            .map(|&((a, b), _)| (self.positions[a].to_f64(), self.positions[b].to_f64()))
            .collect();
        let margin = 1e-7 * self.positions.iter().fold(1.0f64, |m, p| {
            let (x, y) = p.to_f64();
            m.max(x.abs()).max(y.abs())
        });

        // split parameters per edge
        let mut splits: Vec<Vec<(BigReal, usize)>> = vec![Vec::new(); nedges];

        // pass 1: existing vertices on edge interiors
        for (ei, &((a, b), _)) in edge_list.iter().enumerate() {
            let (pa, pb) = (&self.positions[a], &self.positions[b]);
            let ((ax, ay), (bx, by)) = segs_f64[ei];
            let (minx, maxx) = (ax.min(bx) - margin, ax.max(bx) + margin);
            let (miny, maxy) = (ay.min(by) - margin, ay.max(by) + margin);
            let len_f = (bx - ax).hypot(by - ay).max(1e-300);
            for w in 0..self.positions.len() {
                if w == a || w == b {
                    continue;
                }
                let (wx, wy) = self.positions[w].to_f64();
                if wx < minx || wx > maxx || wy < miny || wy > maxy {
                    continue;
                }
                let off = ((wx - ax) * (by - ay) - (wy - ay) * (bx - ax)).abs() / len_f;
                if off > margin {
                    continue;
                }
                let (dist, t) = point_segment_distance(&self.positions[w], pa, pb);
                if dist < self.snap && t.is_positive() && t < self.ctx.one() {
                    splits[ei].push((t, w));
                }
            }
        }

        // pass 2: transversal interior crossings
        for i in 0..nedges {
            for j in (i + 1)..nedges {
                let ((a1, b1), _) = edge_list[i];
                let ((a2, b2), _) = edge_list[j];
                if a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2 {
                    continue; // shared endpoint, never a transversal interior crossing
                }
                if !segments_maybe_cross(&segs_f64[i], &segs_f64[j], margin) {
                    continue;
                }
                let (pa1, pb1) = (&self.positions[a1], &self.positions[b1]);
                let (pa2, pb2) = (&self.positions[a2], &self.positions[b2]);
                let d1 = pb1.sub(pa1);
                let d2 = pb2.sub(pa2);
                let den = d1.cross(&d2);
                if den.is_zero() {
                    continue; // collinear overlap is the multinet case, not a crossing
                }
                let w = pa2.sub(pa1);
                let t = &w.cross(&d2) / &den;
                let s = &w.cross(&d1) / &den;
                let l1 = d1.norm();
                let l2 = d2.norm();
                let eps1 = &self.snap / &l1;
                let eps2 = &self.snap / &l2;
                let one = self.ctx.one();
                if !(t > eps1 && t < &one - &eps1 && s > eps2 && s < &one - &eps2) {
                    continue;
                }
                let pt = pa1.add(&d1.scale(&t));
                let w_idx = match self.lookup(&pt) {
                    Some(v) => v,
                    None => {
                        let name = format!("C{}", self.crossing_counter);
                        self.crossing_counter += 1;
                        self.add_vertex(pt, VertexKind::Interior, name)
                    }
                };
                splits[i].push((t, w_idx));
                splits[j].push((s, w_idx));
            }
        }

        // rebuild the edge map with the splits applied
        let mut new_edges: std::collections::HashMap<(usize, usize), u64> =
            std::collections::HashMap::new();
        for (ei, &((a, b), mult)) in edge_list.iter().enumerate() {
            let mut cuts = splits[ei].clone();
            cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            cuts.dedup_by(|x, y| x.1 == y.1);
            let mut chain = vec![a];
            chain.extend(cuts.iter().map(|&(_, w)| w));
            chain.push(b);
            chain.dedup();
            for pair in chain.windows(2) {
                let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                *new_edges.entry(key).or_insert(0) += mult;
            }
        }
        self.edges = new_edges;
        Ok(())
    }

    fn into_net(self, digits: u32) -> Result<PlanarNet> {
        let out_ctx = Ctx::new(digits);
        let mut net = PlanarNet::new(out_ctx);
        for i in 0..self.positions.len() {
            let p = Point::new(
                self.positions[i].x.with_digits(digits),
                self.positions[i].y.with_digits(digits),
            );
            net.add_vertex(self.names[i].clone(), p, self.kinds[i])?;
        }
        let mut keys: Vec<_> = self.edges.keys().copied().collect();
        keys.sort();
        for (a, b) in keys {
            net.add_edge(self.names[a].clone(), self.names[b].clone(), self.edges[&(a, b)])?;
        }
        Ok(net)
    }
}

/// f64 prefilter: could these segments cross or touch?
fn segments_maybe_cross(
    s1: &((f64, f64), (f64, f64)),
    s2: &((f64, f64), (f64, f64)),
    margin: f64,
) -> bool {
    let ((ax, ay), (bx, by)) = *s1;
    let ((cx, cy), (dx, dy)) = *s2;
    if ax.min(bx) > cx.max(dx) + margin
        || cx.min(dx) > ax.max(bx) + margin
        || ay.min(by) > cy.max(dy) + margin
        || cy.min(dy) > ay.max(by) + margin
    {
        return false;
    }
    let orient = |px: f64, py: f64, qx: f64, qy: f64, rx: f64, ry: f64| -> f64 {
        (qx - px) * (ry - py) - (qy - py) * (rx - px)
    };
    let scale = ((bx - ax).hypot(by - ay) * (dx - cx).hypot(dy - cy)).max(1e-300);
    let eps = margin * scale.sqrt();
    let o1 = orient(ax, ay, bx, by, cx, cy);
    let o2 = orient(ax, ay, bx, by, dx, dy);
    let o3 = orient(cx, cy, dx, dy, ax, ay);
    let o4 = orient(cx, cy, dx, dy, bx, by);
    // clearly separated on either side: no crossing
    if (o1 > eps && o2 > eps) || (o1 < -eps && o2 < -eps) {
        return false;
    }
    if (o3 > eps && o4 > eps) || (o3 < -eps && o4 < -eps) {
        return false;
    }
    true
}

// ---------------------------------------------------------------------------
// Analytic recursions (symmetric case)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AngleSeqSample {
    pub alpha: BigReal,
    pub beta: BigReal,
    pub x: BigReal,
}

/// Wing angle as a function of the incoming angle in the symmetric case:
/// extension for incoming angles above pi, the degree-3 closed form below.
pub fn beta_of_alpha(ctx: Ctx, alpha: &BigReal) -> Result<BigReal> {
    let pi = ctx.pi();
    let gap = (alpha - &pi).abs();
    if gap < ctx.guard_tolerance() {
        return Err(GeonetError::Precondition(
            "alpha at pi within guard tolerance; case dispatch ambiguous".into(),
        ));
    }
    if *alpha > pi {
        Ok(&ctx.two_pi() - alpha)
    } else {
        let half = alpha / &ctx.int(2);
        let arg = (&ctx.ratio(1, 2) - &half.cos()).clamp(&ctx.int(-1), &ctx.one());
        Ok(&ctx.int(2) * &arg.acos())
    }
}

/// The radius ratio `x_{i+1} / x_i` produced by wings meeting at angle beta.
pub fn radius_factor(ctx: Ctx, beta: &BigReal) -> BigReal {
    let half = beta / &ctx.int(2);
    &half.sin() / &(&ctx.pi_frac(6, 7) - &half).sin()
}

/// Analytic sequences `alpha_i`, `beta_i`, `x_i` for `i = 0..=n` with
/// `x_0 = 1`.
pub fn alpha_beta_x_sequences(ctx: Ctx, alpha0: &BigReal, n: usize) -> Result<Vec<AngleSeqSample>> {
    let coupling = ctx.pi_frac(12, 7);
    let mut out = Vec::with_capacity(n + 1);
    let mut alpha = alpha0.clone();
    let mut x = ctx.one();
    for i in 0..=n {
        let beta = beta_of_alpha(ctx, &alpha).map_err(|e| GeonetError::LayerFailed {
            layer: i,
            reason: e.to_string(),
        })?;
        out.push(AngleSeqSample {
            alpha: alpha.clone(),
            beta: beta.clone(),
            x: x.clone(),
        });
        alpha = &coupling - &beta;
        x = &x * &radius_factor(ctx, &beta);
    }
    Ok(out)
}

/// Report for one loop of the radius-contraction claim.
#[derive(Clone, Debug)]
pub struct ContractionClaim {
    pub start: usize,
    pub ell: usize,
    /// True when `alpha_N >= 183 degrees` (the shorter-loop case).
    pub wide_case: bool,
    pub max_ratio: BigReal,
    pub end_ratio: BigReal,
    pub holds: bool,
}

/// Verify the loop claim at base index `n`: some `ell` in `{8, 9}` returns
/// the angle above pi, the radii along the loop stay within `1.3 x_N`, and
/// the loop ends below `0.96 x_N`.
pub fn check_contraction_claim(ctx: Ctx, seq: &[AngleSeqSample], n: usize) -> Result<ContractionClaim> {
    let pi = ctx.pi();
    if n < 9 || seq.len() <= n + 9 {
        return Err(GeonetError::Precondition(
            "claim needs n >= 9 and 9 more computed terms".into(),
        ));
    }
    if !(seq[n].alpha > pi && seq[n].alpha < ctx.pi_frac(19, 18)) {
        return Err(GeonetError::Precondition(format!(
            "alpha_{n} not in (180, 190) degrees"
        )));
    }
    let mut ell = None;
    for l in [8usize, 9] {
        if seq[n + l].alpha > pi {
            ell = Some(l);
            break;
        }
    }
    let ell = ell.ok_or_else(|| {
        GeonetError::Precondition(format!("no loop boundary at n = {n} within 8 or 9 steps"))
    })?;
    let x_n = &seq[n].x;
    let mut max_ratio = ctx.zero();
    for j in 1..ell {
        max_ratio = max_ratio.max(&(&seq[n + j].x / x_n));
    }
    let end_ratio = &seq[n + ell].x / x_n;
    let holds = max_ratio <= ctx.ratio(13, 10) && end_ratio < ctx.ratio(96, 100);
    let wide_case = seq[n].alpha >= ctx.pi_frac(183, 180);
    Ok(ContractionClaim {
        start: n,
        ell,
        wide_case,
        max_ratio,
        end_ratio,
        holds,
    })
}

/// Run the claim at every loop boundary reachable in the sequence.
pub fn sweep_contraction_claims(ctx: Ctx, seq: &[AngleSeqSample]) -> Result<Vec<ContractionClaim>> {
    let pi = ctx.pi();
    let mut out = Vec::new();
    let mut n = 9;
    while n + 9 < seq.len() {
        if seq[n].alpha > pi {
            let claim = check_contraction_claim(ctx, seq, n)?;
            let next = n + claim.ell;
            out.push(claim);
            n = next;
        } else {
            // only reachable if the base case ever failed to be a boundary
            n += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_windows_first_ten() {
        let ctx = Ctx::new(50);
        let alpha0 = ctx.ratio(88, 21);
        let seq = alpha_beta_x_sequences(ctx, &alpha0, 10).unwrap();
        let deg = |r: &BigReal| (&(r * &ctx.int(180)) / &ctx.pi()).to_f64();
        // paper checkpoints
        assert!((deg(&seq[9].alpha) - 186.3174).abs() < 1e-3, "{}", deg(&seq[9].alpha));
        assert!(seq[9].x.to_f64() < 0.7, "x9 = {}", seq[9].x.to_f64());
        assert!((seq[9].x.to_f64() - 0.697142).abs() < 1e-5);
        for s in &seq[1..] {
            assert!(deg(&s.alpha) > 120.0 && deg(&s.alpha) < 190.0);
            assert!(deg(&s.beta) > 120.0 && deg(&s.beta) < 180.0);
            assert!(s.x < ctx.one());
        }
    }

    #[test]
    fn beta_limit_values() {
        // alpha -> alpha_next at the window edges from the iteration map
        let ctx = Ctx::new(40);
        let g = |a: BigReal| -> f64 {
            let b = beta_of_alpha(ctx, &a).unwrap();
            (&(&(&ctx.pi_frac(12, 7) - &b) * &ctx.int(180)) / &ctx.pi()).to_f64()
        };
        assert!((g(ctx.pi_frac(120, 180)) - 128.5714).abs() < 1e-3);
        // limiting case alpha -> 180 degrees from below
        let near_pi = &ctx.pi() - &ctx.pow10(-9);
        assert!((g(near_pi) - 188.5714).abs() < 1e-3);
    }

    #[test]
    fn star_initial_layer_defining_equation() {
        let cfg = StarConfig::symmetric(40, 0);
        let st = build_star(&cfg).unwrap();
        let ctx = st.work_ctx();
        // inner radius 1, measured alpha equals alpha0, phi = 0
        assert!((&st.layers[0].x - &ctx.one()).abs() < ctx.pow10(-35));
        assert!((&st.layers[0].alpha - &cfg.alpha0).abs() < ctx.pow10(-35));
        assert!(st.layers[0].phi.abs() < ctx.pow10(-35));
    }

    #[test]
    fn star_case_tags_match_figure() {
        let cfg = StarConfig::symmetric(30, 5);
        let st = build_star(&cfg).unwrap();
        let tags: Vec<&str> = st.layers.iter().map(|l| l.created_by.as_str()).collect();
        assert_eq!(tags, vec!["initial", "A", "A", "B1", "B2", "B1"]);
    }

    #[test]
    fn star_geometry_matches_analytic() {
        let cfg = StarConfig::symmetric(40, 12);
        let st = build_star(&cfg).unwrap();
        let check = st.crosscheck_analytic().unwrap();
        let bound = Ctx::new(40).pow10(-30);
        assert!(check.max_alpha_deviation < bound, "{:?}", check);
        assert!(check.max_x_deviation < bound, "{:?}", check);
    }

    #[test]
    fn deviated_star_measures_phi0() {
        let cfg = StarConfig::new(40, 2, "1e-3", "88/21").unwrap();
        let st = build_star(&cfg).unwrap();
        let ctx = st.work_ctx();
        let phi = ctx.parse("1e-3").unwrap();
        assert!(
            (&st.layers[0].phi - &phi).abs() < ctx.pow10(-35),
            "phi0 = {}",
            st.layers[0].phi
        );
        // rotational symmetry preserved: all seven copies at the same radius
        assert!(st.layers[1].x.is_positive());
    }

    #[test]
    fn config_rejects_small_alpha0() {
        assert!(StarConfig::new(30, 1, "0", "4.0").is_err());
        // 240 degrees exactly is also rejected
        assert!(StarConfig::new(30, 1, "0", "4.18879").is_err());
    }

    #[test]
    fn g3_net_counts() {
        let cfg = StarConfig::symmetric(40, 3);
        let st = build_star(&cfg).unwrap();
        assert_eq!(st.constructed_balanced_count(), 21);
        assert_eq!(st.fermat_vertex_count(), 7);
        let net = st.to_net().unwrap();
        assert_eq!(net.boundary_count(), 14);
        let rep = net.validate();
        assert!(rep.passes, "max residual {}", rep.max_interior_residual);
    }

    #[test]
    fn contraction_claim_first_loop() {
        let ctx = Ctx::new(50);
        let alpha0 = ctx.ratio(88, 21);
        let seq = alpha_beta_x_sequences(ctx, &alpha0, 40).unwrap();
        let claim = check_contraction_claim(ctx, &seq, 9).unwrap();
        assert!(claim.holds, "{claim:?}");
        assert!(claim.ell == 8 || claim.ell == 9);
    }
}
