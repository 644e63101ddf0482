//! Plane geometry over [`BigReal`]: points, rotations, angle measures,
//! ray/segment intersections and the circumcircle construction.

use crate::bigreal::{BigReal, Ctx};
use crate::error::{GeonetError, Result};

#[derive(Clone, Debug)]
pub struct Point {
    pub x: BigReal,
    pub y: BigReal,
}

impl Point {
    pub fn new(x: BigReal, y: BigReal) -> Point {
        Point { x, y }
    }

    pub fn origin(ctx: Ctx) -> Point {
        Point::new(ctx.zero(), ctx.zero())
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn scale(&self, t: &BigReal) -> Point {
        Point::new(&self.x * t, &self.y * t)
    }

    pub fn neg(&self) -> Point {
        Point::new(-&self.x, -&self.y)
    }

    pub fn dot(&self, o: &Point) -> BigReal {
        &(&self.x * &o.x) + &(&self.y * &o.y)
    }

    pub fn cross(&self, o: &Point) -> BigReal {
        &(&self.x * &o.y) - &(&self.y * &o.x)
    }

    pub fn norm(&self) -> BigReal {
        BigReal::hypot(&self.x, &self.y)
    }

    pub fn dist(&self, o: &Point) -> BigReal {
        self.sub(o).norm()
    }

    pub fn unit(&self) -> Result<Point> {
        let n = self.norm();
        if n.is_zero() {
            return Err(GeonetError::Precondition(
                "unit vector of zero-length vector".into(),
            ));
        }
        Ok(Point::new(&self.x / &n, &self.y / &n))
    }

    /// Rotate about the origin by precomputed `(cos, sin)`.
    pub fn rotate_cs(&self, cos: &BigReal, sin: &BigReal) -> Point {
        Point::new(
            &(cos * &self.x) - &(sin * &self.y),
            &(sin * &self.x) + &(cos * &self.y),
        )
    }

    pub fn rotate(&self, angle: &BigReal) -> Point {
        self.rotate_cs(&angle.cos(), &angle.sin())
    }

    /// Counterclockwise perpendicular.
    pub fn perp(&self) -> Point {
        Point::new(-&self.y, self.x.clone())
    }

    /// Polar angle in `(-pi, pi]`.
    pub fn angle(&self) -> BigReal {
        BigReal::atan2(&self.y, &self.x)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Signed counterclockwise angle from `a` to `b`, in `(-pi, pi]`.
pub fn signed_angle(a: &Point, b: &Point) -> BigReal {
    BigReal::atan2(&a.cross(b), &a.dot(b))
}

/// Unsigned angle between `a` and `b`, in `[0, pi]`.
pub fn angle_between(a: &Point, b: &Point) -> BigReal {
    signed_angle(a, b).abs()
}

/// Angle from `a` to `b` swept counterclockwise, in `[0, 2pi)`.
pub fn ccw_angle(ctx: Ctx, a: &Point, b: &Point) -> BigReal {
    signed_angle(a, b).rem_euclid(&ctx.two_pi())
}

/// Intersection of rays `p + t d` and `q + s e`.
/// Returns the point and both parameters; error when nearly parallel.
pub fn ray_intersect(p: &Point, d: &Point, q: &Point, e: &Point) -> Result<(Point, BigReal, BigReal)> {
    let den = d.cross(e);
    if den.is_zero() {
        return Err(GeonetError::Precondition("parallel rays do not intersect".into()));
    }
    let w = q.sub(p);
    let t = &w.cross(e) / &den;
    let s = &w.cross(d) / &den;
    Ok((p.add(&d.scale(&t)), t, s))
}

/// Circumcircle of three non-collinear points: `(center, radius)`.
pub fn circumcircle(a: &Point, b: &Point, c: &Point) -> Result<(Point, BigReal)> {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let den = ab.cross(&ac);
    if den.is_zero() {
        return Err(GeonetError::Precondition("circumcircle of collinear points".into()));
    }
    let ab2 = ab.dot(&ab);
    let ac2 = ac.dot(&ac);
    let two = &den + &den;
    let ux = &(&(&ac.y * &ab2) - &(&ab.y * &ac2)) / &two;
    let uy = &(&(&ab.x * &ac2) - &(&ac.x * &ab2)) / &two;
    let center = Point::new(&a.x + &ux, &a.y + &uy);
    let r = BigReal::hypot(&ux, &uy);
    Ok((center, r))
}

/// Distance from point `p` to segment `ab` and the clamped parameter.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> (BigReal, BigReal) {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.dot(&ab);
    if len2.is_zero() {
        let d = ap.norm();
        let zero = &d - &d;
        return (d, zero);
    }
    let t_raw = &ap.dot(&ab) / &len2;
    let zero = &t_raw - &t_raw;
    let one = &len2 / &len2;
    let t = t_raw.clamp(&zero, &one);
    let closest = a.add(&ab.scale(&t));
    (p.dist(&closest), t)
}

/// Intersections of segment `ab` with the circle of radius `r` at `center`,
/// as sorted parameters `t` in `[0, 1]`.
pub fn segment_circle_params(a: &Point, b: &Point, center: &Point, r: &BigReal) -> Vec<BigReal> {
    let d = b.sub(a);
    let f = a.sub(center);
    let qa = d.dot(&d);
    if qa.is_zero() {
        return vec![];
    }
    let qb = &(&f.dot(&d) + &f.dot(&d));
    let qc = &f.dot(&f) - &(r * r);
    let disc = &(qb * qb) - &(&(&qa + &qa) * &(&qc + &qc));
    if disc.is_negative() {
        return vec![];
    }
    let sq = disc.sqrt();
    let two_a = &qa + &qa;
    let one = &qa / &qa;
    let t1 = &(&sq - qb) / &two_a;
    let t2 = &(&(-&sq) - qb) / &two_a;
    let mut out: Vec<BigReal> = [t1, t2]
        .into_iter()
        .filter(|t| !t.is_negative() && *t <= one)
        .collect();
    out.sort_by(|m, n| m.partial_cmp(n).unwrap());
    out.dedup_by(|m, n| m == n);
    out
}

/// Convex hull (counterclockwise) of a point set; Andrew's monotone chain.
/// Returns indices into `pts`. Degenerate inputs yield fewer than 3 indices.
pub fn convex_hull(pts: &[Point]) -> Vec<usize> {
    let n = pts.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        pts[i]
            .x
            .partial_cmp(&pts[j].x)
            .unwrap()
            .then(pts[i].y.partial_cmp(&pts[j].y).unwrap())
    });
    let cross3 = |o: usize, a: usize, b: usize| -> BigReal {
        pts[a].sub(&pts[o]).cross(&pts[b].sub(&pts[o]))
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * n);
    for &i in &idx {
        while hull.len() >= 2 && !cross3(hull[hull.len() - 2], hull[hull.len() - 1], i).is_positive() {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev() {
        while hull.len() >= lower_len
            && !cross3(hull[hull.len() - 2], hull[hull.len() - 1], i).is_positive()
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Signed distance of `p` outside the convex polygon `hull` (ccw vertex list).
/// Non-positive when inside or on the boundary; for degenerate hulls uses
/// distance to the segment or point.
pub fn hull_excess(p: &Point, hull: &[Point]) -> BigReal {
    match hull.len() {
        0 => p.norm(), // no boundary vertices: treat origin as hull
        1 => p.dist(&hull[0]),
        2 => point_segment_distance(p, &hull[0], &hull[1]).0,
        _ => {
            let mut worst: Option<BigReal> = None;
            for i in 0..hull.len() {
                let a = &hull[i];
                let b = &hull[(i + 1) % hull.len()];
                let edge = b.sub(a);
                let elen = edge.norm();
                // positive when p is to the right of the ccw edge, i.e. outside
                let d = &edge.cross(&p.sub(a)).neg() / &elen;
                worst = Some(match worst {
                    None => d.clone(),
                    Some(w) => w.max(&d),
                });
            }
            worst.unwrap()
        }
    }
}
