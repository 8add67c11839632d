use bolzalab::atlas::*;
use bolzalab::field::cone::*;
use bolzalab::field::FieldKind;
use std::sync::Arc;

fn main() {
    let a = Arc::new(build_bolza_atlas());
    for h in [0.032, 0.016, 0.008] {
        let m = solve_flat_cone_metric(&ConePrescription::flat_bolza(), Arc::clone(&a), h).unwrap();
        if let FieldKind::Cone { w, .. } = &m.kind {
            let mut vals = Vec::new();
            for j in 2..w.ny - 2 {
                for i in 2..w.nx - 2 {
                    let z = w.node(i, j);
                    if !a.contains(z) { continue; }
                    let lap2 = w.laplacian_node(i, j);
                    let f = -4.0 / (1.0 - z.norm_sqr()).powi(2);
                    vals.push((lap2 - f, z));
                }
            }
            let mean = vals.iter().map(|v| v.0).sum::<f64>() / vals.len() as f64;
            let mut dev: Vec<(f64, _)> = vals.iter().map(|(v, z)| ((v - mean).abs(), *z)).collect();
            dev.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            println!("h={h}: delta={mean:.4e}  max|res-mean|={:.3e} at {} (r={:.3})",
                dev[0].0, dev[0].1, dev[0].1.norm());
            println!("    2nd..5th: {:?}", dev[1..5].iter().map(|d| (d.0*1e6).round()/1e6).collect::<Vec<_>>());
        }
    }
}
