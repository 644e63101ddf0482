//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Criterion 7's deviated half runs exactly as specified (100 layers at
//! phi = 1e-3). That configuration is geometrically infeasible — the
//! derivative sequence the paper itself computes grows to ~1e62 by layer
//! 100, so the feasibility window at 100 layers is around 1e-66 — and the
//! test records the failure honestly. The companion test demonstrates the
//! multinet-to-net transition at a feasible deviation.

use std::time::Instant;

use geonet::constructions::{
    build_double_polygon, build_four_point_trees, build_weighted_triangle, build_y_net_equilateral,
    WeightedTriangleSpec,
};
use geonet::derivseq::{agreement_digits, derivative_sequence, finite_difference_crosscheck, gap_analysis};
use geonet::relax::{relax, RelaxProblem};
use geonet::star::{alpha_beta_x_sequences, build_star, sweep_contraction_claims, StarConfig};
use geonet::{Ctx, PlanarNet, Point};

fn report(criterion: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion}: {detail}");
}

/// Deterministic LCG for reproducible random radii.
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }
}

#[test]
fn criterion_1_angle_window_lemma() {
    let start = Instant::now();
    let ctx = Ctx::new(50);
    let alpha0 = ctx.ratio(88, 21);
    let seq = alpha_beta_x_sequences(ctx, &alpha0, 1000).expect("sequence");
    let lo = ctx.pi_frac(120, 180);
    let hi_a = ctx.pi_frac(190, 180);
    let hi_b = ctx.pi();
    let mut ok = true;
    for s in seq.iter().take(1001).skip(1) {
        ok &= s.alpha > lo && s.alpha < hi_a;
        ok &= s.beta > lo && s.beta < hi_b;
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    report(
        "1",
        ok,
        &format!("120 < alpha_i < 190 and 120 < beta_i < 180 degrees for i in 1..=1000 at 50 digits ({} ms)",
            elapsed.as_millis()),
    );
}

#[test]
fn criterion_2_radius_claims() {
    let start = Instant::now();
    let ctx = Ctx::new(50);
    let alpha0 = ctx.ratio(88, 21);
    let seq = alpha_beta_x_sequences(ctx, &alpha0, 1010).expect("sequence");
    let one = ctx.one();
    let mut ok = seq.iter().take(1001).skip(1).all(|s| s.x < one);
    ok &= seq[9].x < ctx.ratio(7, 10);
    ok &= seq[9].alpha > ctx.pi() && seq[9].alpha < ctx.pi_frac(19, 18);
    let claims = sweep_contraction_claims(ctx, &seq).expect("claims");
    ok &= !claims.is_empty();
    let mut last_end = 9usize;
    for c in &claims {
        ok &= c.holds && (c.ell == 8 || c.ell == 9);
        last_end = c.start + c.ell;
    }
    ok &= last_end >= 1000;
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    report(
        "2",
        ok,
        &format!(
            "x_i < 1 up to 1000, x9 = {} < 0.7, alpha9 in (180, 190), contraction claim holds at {} loop boundaries ({} ms)",
            seq[9].x.to_dec_string_digits(8),
            claims.len(),
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_3_derivative_gap_reproduction() {
    let start = Instant::now();
    let mut gaps = Vec::new();
    let mut ok = true;
    for digits in [10u32, 30, 50, 100] {
        let ctx = Ctx::new(digits);
        let alpha0 = ctx.ratio(88, 21);
        let state = derivative_sequence(ctx, &alpha0, 100).expect("sequence");
        let rep = gap_analysis(&state.phi_primes()).expect("gaps");
        ok &= rep.argmin == (0, 2);
        gaps.push(rep.min_gap);
    }
    let ctx = Ctx::new(50);
    let target = ctx.parse("3.743673268").unwrap();
    let tol = ctx.parse("1e-6").unwrap();
    for g in &gaps {
        ok &= (g - &target).abs() < tol;
    }
    // stability to 9 significant digits across the precision sweep
    for pair in gaps.windows(2) {
        ok &= agreement_digits(&pair[0], &pair[1].with_digits(10)) >= 9
            || agreement_digits(&pair[0].with_digits(10), &pair[1].with_digits(10)) >= 9;
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 10.0;
    report(
        "3",
        ok,
        &format!(
            "min gap {} at (0, 2), stable across 10/30/50/100 digits ({} ms)",
            gaps[2].to_dec_string_digits(10),
            elapsed.as_millis()
        ),
    );
}

/// Feasible deviation for an n-layer star: the deviation mode grows by
/// about a factor 10^0.7 per layer, so scale phi down accordingly.
fn feasible_phi(n: usize) -> String {
    if n <= 3 {
        "1e-3".to_string()
    } else {
        format!("1e-{}", 3 + (n * 8).div_ceil(10))
    }
}

fn identity_suite(net: &PlanarNet, name: &str, radii: usize, rng: &mut Lcg) -> Result<(), String> {
    let ctx = net.ctx();
    let tol_tiv = ctx.pow10(-25);
    let tiv = net.total_imbalance_vector().norm();
    if tiv > tol_tiv {
        return Err(format!("{name}: total imbalance vector norm {tiv}"));
    }

    let length = net.length();
    match net.length_via_imbalance() {
        Ok(lvi) => {
            let rel = (&(&length - &lvi) / &length).abs();
            if rel > ctx.pow10(-20) {
                return Err(format!("{name}: length identity relative error {rel}"));
            }
        }
        Err(e) => return Err(format!("{name}: length_via_imbalance: {e}")),
    }

    // truncated identity at random non-special radii
    let origin = Point::new(ctx.ratio(3, 100), ctx.ratio(17, 1000));
    let mut max_coord = 0.0f64;
    for v in net.vertices() {
        let (x, y) = v.pos.to_f64();
        max_coord = max_coord.max(x.abs()).max(y.abs());
    }
    let tol_disk = ctx.pow10(-20);
    let candidates: Vec<_> = (0..radii * 4)
        .map(|_| ctx.from_f64((0.05 + 1.5 * rng.next_f64()) * max_coord))
        .collect();
    let results = net.disk_identity_batch(&candidates, &origin);
    let mut done = 0;
    for (r, res) in candidates.iter().zip(results) {
        if done == radii {
            break;
        }
        match res {
            Ok(id) => {
                let dev = (&id.lhs - &id.rhs).abs();
                if dev > tol_disk {
                    return Err(format!(
                        "{name}: disk identity deviation {dev} at r = {}",
                        r.to_dec_string_digits(8)
                    ));
                }
                done += 1;
            }
            Err(_) => continue, // special radius; skip
        }
    }
    if done < radii {
        return Err(format!("{name}: could not find {radii} non-special radii"));
    }
    Ok(())
}

#[test]
fn criterion_4_identity_suite() {
    let start = Instant::now();
    let ctx = Ctx::new(50);
    let mut rng = Lcg(0x5eed_1234_abcd_0042);
    let mut nets: Vec<(String, PlanarNet)> = Vec::new();

    nets.push(("y-net".into(), build_y_net_equilateral(ctx)));
    let quad = [
        Point::new(ctx.int(0), ctx.int(0)),
        Point::new(ctx.int(1), ctx.int(0)),
        Point::new(ctx.int(1), ctx.int(1)),
        Point::new(ctx.int(0), ctx.int(1)),
    ];
    let four = build_four_point_trees(ctx, &quad).expect("four point nets");
    nets.push(("four-point-x".into(), four.x_net));
    for (i, t) in four.trees.into_iter().enumerate() {
        nets.push((format!("four-point-tree{i}"), t));
    }
    for n in 3..=12 {
        nets.push((format!("double-{n}-gon"), build_double_polygon(ctx, n).unwrap()));
    }
    for k in 1..=5 {
        let spec = WeightedTriangleSpec::pythagorean_5_12_13(ctx, k);
        nets.push((format!("weighted-triangle-k{k}"), build_weighted_triangle(ctx, &spec).unwrap()));
    }
    for n in [3usize, 10, 30] {
        let cfg = StarConfig::symmetric(50, n);
        nets.push((format!("star-G{n}(0)"), build_star(&cfg).unwrap().to_net().unwrap()));
        let phi = feasible_phi(n);
        let cfg = StarConfig::new(50, n, &phi, "88/21").unwrap();
        nets.push((
            format!("star-G{n}({phi})"),
            build_star(&cfg).unwrap().to_net().unwrap(),
        ));
    }

    let mut failures = Vec::new();
    for (name, net) in &nets {
        if let Err(e) = identity_suite(net, name, 100, &mut rng) {
            failures.push(e);
        }
    }
    let elapsed = start.elapsed();
    let mut ok = failures.is_empty();
    ok &= elapsed.as_secs_f64() < 60.0;
    report(
        "4",
        ok,
        &format!(
            "identities (1.2.1), (1.2.2), (1.2.3) on {} example nets with 100 radii each ({} s){}",
            nets.len(),
            elapsed.as_secs(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let cfg = StarConfig::symmetric(50, 30);
    let st = build_star(&cfg).expect("G_30(0)");
    let check = st.crosscheck_analytic().expect("crosscheck");
    let bound = Ctx::new(50).pow10(-25);
    let ok = check.max_alpha_deviation < bound && check.max_x_deviation < bound;
    report(
        "5",
        ok,
        &format!(
            "geometric vs analytic over G_30(0): max |alpha| dev {}, max |x| dev {}",
            check.max_alpha_deviation.to_dec_string_digits(4),
            check.max_x_deviation.to_dec_string_digits(4)
        ),
    );
}

#[test]
fn criterion_6_derivation_check_second_order() {
    // h is calibrated to the actual third-derivative scale (|phi'''_10| is
    // about 2.5e24, so h near 4e-17 puts the h^2 term at the 1e-9 level)
    let rep1 = finite_difference_crosscheck(60, 10, "4e-17").expect("fd at h");
    let rep2 = finite_difference_crosscheck(60, 10, "2e-17").expect("fd at h/2");
    let ctx = Ctx::new(60);
    let mut ok = rep1.max_deviation < ctx.pow10(-9);
    // second-order convergence: halving h quarters the deviation
    let mut ratios = Vec::new();
    for i in 0..rep1.deviations.len() {
        let d1 = &rep1.deviations[i];
        let d2 = &rep2.deviations[i];
        if *d1 > ctx.pow10(-22) && !d2.is_zero() {
            let r = (d1 / d2).to_f64();
            ratios.push(r);
            ok &= (3.5..=4.5).contains(&r);
        }
    }
    ok &= !ratios.is_empty();
    report(
        "6",
        ok,
        &format!(
            "finite differences converge at second order: max dev {} at h = 4e-17, ratios {:?}",
            rep1.max_deviation.to_dec_string_digits(4),
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7a_symmetric_star_is_multinet() {
    let start = Instant::now();
    let cfg = StarConfig::symmetric(50, 20);
    let st = build_star(&cfg).expect("G_20(0)");
    let net = st.to_net().expect("net");
    let overlaps = net.detect_overlaps();
    let mut suspension_groups = 0usize;
    let mut outer_gon_doubled = 0usize;
    for g in &overlaps.groups {
        let involves_fermat = g.edges.iter().any(|&i| {
            let e = &net.edges()[i];
            e.a.0.starts_with('F') || e.b.0.starts_with('F')
        });
        let outer_to_fermat = g.edges.iter().any(|&i| {
            let e = &net.edges()[i];
            (e.a.0.starts_with('P') && e.b.0.starts_with('F'))
                || (e.b.0.starts_with('P') && e.a.0.starts_with('F'))
        });
        if outer_to_fermat && g.merged_multiplicity >= 2 {
            outer_gon_doubled += 1;
        } else if involves_fermat || g.merged_multiplicity >= 2 {
            suspension_groups += 1;
        }
    }
    let ok = !overlaps.is_empty() && suspension_groups > 0 && outer_gon_doubled >= 14;
    report(
        "7a",
        ok,
        &format!(
            "G_20(0) is a strict multinet: {} overlap groups, {} suspension groups, {} doubled outermost-14-gon edges ({} s)",
            overlaps.groups.len(),
            suspension_groups,
            outer_gon_doubled,
            start.elapsed().as_secs()
        ),
    );
}

#[test]
fn criterion_7b_deviated_g100_as_specified() {
    // As specified: phi = 1e-3, n = 100, 50 digits. The paper's own
    // derivative growth (|phi_i'(0)| ~ 1e62 at i = 100) makes the
    // feasibility window for 100 layers about 1e-66, so the build must
    // break around layer 4-5; the criterion cannot hold as stated.
    let start = Instant::now();
    let cfg = StarConfig::new(50, 100, "1e-3", "88/21").expect("config");
    match build_star(&cfg) {
        Ok(st) => {
            let net = st.to_net().expect("net");
            let overlaps = net.detect_overlaps();
            let validation = net.validate();
            let ok = overlaps.is_empty() && validation.passes;
            report(
                "7b",
                ok,
                &format!(
                    "G_100(1e-3): overlap report empty = {}, validate passes = {} ({} s)",
                    overlaps.is_empty(),
                    validation.passes,
                    start.elapsed().as_secs()
                ),
            );
        }
        Err(e) => {
            report(
                "7b",
                false,
                &format!(
                    "G_100(1e-3) cannot be built: {e}. The deviation 1e-3 is amplified by the \
                     suspension-angle derivatives (growing to ~1e62 by layer 100 as in the \
                     derivative-sequence evidence), so construction preconditions break after a \
                     few layers; a deviation near 1e-68 is required for 100 layers. See the \
                     companion test for the feasible demonstration."
                ),
            );
        }
    }
}

#[test]
fn criterion_7_supplementary_feasible_deviation() {
    // The multinet-to-net transition the criterion is about, demonstrated
    // inside the actual feasibility window: at 100 layers the deviation
    // must be ~1e-68, with precision raised so the overlap scan can still
    // distinguish suspension edges (pairwise angle gaps ~3.74e-68).
    let start = Instant::now();
    let cfg = StarConfig::new(240, 100, "1e-68", "88/21").expect("config");
    let st = build_star(&cfg).expect("G_100(1e-68) builds inside the feasibility window");
    let net = st.to_net().expect("net");
    let overlaps = net.detect_overlaps();
    let validation = net.validate();
    let mut ok = overlaps.is_empty() && validation.passes;
    ok &= net.boundary_count() == 14;
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    report(
        "7-supplementary",
        ok,
        &format!(
            "G_100(1e-68) at 240 digits: overlap report empty = {}, validate passes = {}, max residual {} ({} s)",
            overlaps.is_empty(),
            validation.passes,
            validation.max_interior_residual.to_dec_string_digits(4),
            elapsed.as_secs()
        ),
    );
}

#[test]
fn criterion_8_structure_counts() {
    let mut ok = true;
    let mut details = Vec::new();
    for (n, phi) in [(0usize, "0"), (2, "0"), (3, "0"), (6, "1e-6"), (10, "1e-11")] {
        let cfg = StarConfig::new(40, n, phi, "88/21").expect("config");
        let st = build_star(&cfg).expect("build");
        let net = st.to_net().expect("net");
        let boundary = net.boundary_count();
        ok &= boundary == 14;
        // seven vertices per layer, all layers present
        ok &= st.layers.len() == n + 1;
        if n == 3 && phi == "0" {
            ok &= st.constructed_balanced_count() == 21;
            details.push(format!("G_3(0): {} constructed balanced layer vertices", st.constructed_balanced_count()));
        }
        details.push(format!("G_{n}({phi}): {boundary} boundary"));
    }
    report("8", ok, &details.join("; "));
}

#[test]
fn criterion_9_relaxation_sanity() {
    let h = 3f64.sqrt() / 2.0;
    let problem = RelaxProblem {
        ids: vec!["o".into(), "a".into(), "b".into(), "c".into()],
        positions: vec![[0.31, -0.22], [1.0, 0.0], [-0.5, h], [-0.5, -h]],
        pinned: vec![false, true, true, true],
        edges: vec![(0, 1, 1), (0, 2, 1), (0, 3, 1)],
        grad_tol: 1e-11,
        merge_threshold: None,
        max_iters: 200_000,
    };
    let trace = relax(&problem).expect("relax");
    let mut ok = trace.converged;
    for w in trace.lengths.windows(2) {
        ok &= w[1] <= w[0] + 1e-12;
    }
    // brute-force oracle: grid scan plus coordinate refinement of the
    // sum-of-distances objective
    let terminals = [[1.0, 0.0], [-0.5, h], [-0.5, -h]];
    let obj = |x: f64, y: f64| -> f64 {
        terminals
            .iter()
            .map(|t| ((x - t[0]).powi(2) + (y - t[1]).powi(2)).sqrt())
            .sum()
    };
    let (mut bx, mut by, mut bf) = (0.0, 0.0, f64::INFINITY);
    for i in -50..=50 {
        for j in -50..=50 {
            let (x, y) = (i as f64 / 50.0, j as f64 / 50.0);
            let v = obj(x, y);
            if v < bf {
                (bx, by, bf) = (x, y, v);
            }
        }
    }
    let mut step = 0.02;
    while step > 1e-12 {
        let mut improved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let v = obj(bx + dx * step, by + dy * step);
            if v < bf {
                bx += dx * step;
                by += dy * step;
                bf = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let o = trace.final_net.vertex(&"o".into()).expect("survivor");
    let (x, y) = o.pos.to_f64();
    let dist = (x - bx).hypot(y - by);
    ok &= dist < 1e-8;
    report(
        "9",
        ok,
        &format!(
            "Y-topology relaxation: converged = {}, distance to brute-force minimizer {dist:.2e}, objective non-increasing over {} iterations",
            trace.converged,
            trace.iterations
        ),
    );
}
