use std::time::Instant;

use sdpcut::gen;
use sdpcut::oracle::brute_phi;
use sdpcut::rat::to_f64;
use sdpcut::sdp::{check_feasibility, solve_arv};

fn main() {
    for (name, g) in [
        ("K2", gen::complete(2)),
        ("K4", gen::complete(4)),
        ("C6", gen::cycle(6)),
        ("2xK4", gen::disjoint_cliques(2, 4)),
        ("C8", gen::cycle(8)),
        ("C12", gen::cycle(12)),
        ("C16", gen::cycle(16)),
        ("K8", gen::complete(8)),
        ("ring(2,8)", gen::clique_ring(2, 8)),
        ("ring(4,4)", gen::clique_ring(4, 4)),
        ("ring(4,5)", gen::clique_ring(4, 5)),
    ] {
        let t = Instant::now();
        match solve_arv(&g, 1e-6) {
            Ok(sol) => {
                let rep = check_feasibility(&sol, 1e-6);
                let phi = to_f64(&brute_phi(&g).unwrap().value);
                println!(
                    "{name}: obj={:.6} phi={:.6} gap={:+.2e} tri={:.1e} norm={:.1e} pass={} ({:.2}s)",
                    sol.objective,
                    phi,
                    sol.objective - phi,
                    rep.max_triangle_violation,
                    rep.normalization_residual,
                    rep.pass,
                    t.elapsed().as_secs_f64()
                );
            }
            Err(e) => println!("{name}: ERROR {e}"),
        }
    }
}
