use std::time::Instant;
use geonet::star::{build_star, StarConfig};
use geonet::{Ctx, Point};

fn main() {
    let t0 = Instant::now();
    let cfg = StarConfig::symmetric(50, 30);
    let st = build_star(&cfg).unwrap();
    println!("build G_30(0): {:?}", t0.elapsed());
    let t1 = Instant::now();
    let net = st.to_net().unwrap();
    println!("to_net: {:?} ({} vertices, {} edges)", t1.elapsed(), net.vertices().len(), net.edges().len());
    let ctx = Ctx::new(50);
    let origin = Point::new(ctx.ratio(3, 100), ctx.ratio(17, 1000));
    let t2 = Instant::now();
    let mut n = 0;
    for k in 0..20 {
        let r = ctx.from_f64(0.05 + 1.5 * (k as f64 + 0.3) / 20.0);
        if net.disk_length_identity(&r, &origin).is_ok() { n += 1; }
    }
    println!("20 disk identities: {:?} ({} ok)", t2.elapsed(), n);
    let t3 = Instant::now();
    let _ = net.length_via_imbalance().unwrap();
    println!("length_via_imbalance: {:?}", t3.elapsed());
}
