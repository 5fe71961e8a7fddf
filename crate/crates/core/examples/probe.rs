use std::time::Instant;

use nmg_core::model::{paper_datum, paper_params, GridFunction};
use nmg_core::perimeter::{energy_delta, EnergyWindow};
use nmg_core::solver::{residual_estimates, solve_cascade, SolveConfig};
use nmg_core::{FracOrder, QuadratureSpec};

fn main() {
    let order = FracOrder::new(0.5).unwrap();
    let q = QuadratureSpec::for_domain_width(2.0 * 14.58938076105978);
    let dx257 = 2.0 * 14.58938076105978 / 258.0;
    let cfg = SolveConfig {
        max_iters: 4000,
        step0: 2.0 * dx257.powf(1.5),
        ..SolveConfig::default()
    };

    let mut star: Option<GridFunction> = None;
    for eta in [0.2, 0.1, 0.05, 0.025] {
        let p = paper_params(order, 0.1, eta).unwrap();
        let datum = paper_datum(&p, p.default_ramp_width()).unwrap();
        let t0 = Instant::now();
        let rep = solve_cascade(&datum, 257, &cfg, order, &q).unwrap();
        println!(
            "eta={eta}: elapsed={:.1?} converged={} iters={} final={:.3e} first={:.6e} sup={:.4e}",
            t0.elapsed(),
            rep.converged,
            rep.iters,
            rep.final_residual,
            rep.solution.values()[0],
            rep.solution.sup_norm()
        );
        if eta == 0.1 {
            star = Some(rep.solution.clone());
        }
    }

    let p = paper_params(order, 0.1, 0.1).unwrap();
    let datum = paper_datum(&p, p.default_ramp_width()).unwrap();
    let t0 = Instant::now();
    let rep129 = solve_cascade(&datum, 129, &cfg, order, &q).unwrap();
    println!(
        "n=129: elapsed={:.1?} converged={} first={:.6e}",
        t0.elapsed(),
        rep129.converged,
        rep129.solution.values()[0]
    );

    let star = star.unwrap();
    let t0 = Instant::now();
    let est = residual_estimates(&star, order, &q).unwrap();
    println!("residuals: {:.1?}", t0.elapsed());

    // Compact perturbation: smooth bump over 7 nodes around i0.
    let dx = star.dx();
    let eps_big = 0.1 * p.cbar * p.eta;
    for i0 in [60usize, 128, 200] {
        let mut vals = star.values().to_vec();
        for k in 0..7 {
            let i = i0 - 3 + k;
            let t = (k as f64 - 3.0) / 3.5;
            vals[i] += eps_big * (1.0 - t * t);
        }
        let v = GridFunction::with_values(*star.datum(), 257, vals).unwrap();
        let a = star.node_x(i0 - 4);
        let b = star.node_x(i0 + 4);
        let win = EnergyWindow::new(a, b, 1.0).unwrap();
        let t0 = Instant::now();
        let d = energy_delta(&star, &v, &win, order, &q).unwrap();
        let l1: f64 = (0..7).map(|k| {
            let t = (k as f64 - 3.0) / 3.5;
            eps_big * (1.0 - t * t) * dx
        }).sum();
        println!(
            "pert@{i0}: delta={d:.6e} elapsed={:.1?} bound={:.3e}",
            t0.elapsed(),
            est.iter().map(|e| e.value.abs()).fold(0.0_f64, f64::max) * l1
        );
    }

    // Central-difference gradient at the strongest interior residual node.
    let k = 2 + est[2..255]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.abs().total_cmp(&b.1.value.abs()))
        .unwrap()
        .0;
    let h_k = est[k].value;
    let eps = 1e-3 * p.cbar * p.eta;
    let mut up = star.values().to_vec();
    let mut dn = star.values().to_vec();
    up[k] += eps;
    dn[k] -= eps;
    let u_plus = GridFunction::with_values(*star.datum(), 257, up).unwrap();
    let u_minus = GridFunction::with_values(*star.datum(), 257, dn).unwrap();
    let win = EnergyWindow::new(star.node_x(k - 2), star.node_x(k + 2), 1.0).unwrap();
    let t0 = Instant::now();
    let d = energy_delta(&u_plus, &u_minus, &win, order, &q).unwrap();
    let grad = d / (2.0 * eps);
    println!(
        "grad@{k}: H={h_k:.6e} fd={:.6e} ratio={:.4} elapsed={:.1?}",
        grad / dx,
        grad / (dx * h_k),
        t0.elapsed()
    );
}
