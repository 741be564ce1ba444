use std::time::Instant;
use sdpcut::gen;
use sdpcut::sdp::{solve_sa_for_set_with, validate_sa, SaConfig};

fn main() {
    let g = gen::clique_ring(2, 8);
    for (outer, inner) in [(200usize, 900usize), (400, 2000), (800, 3000)] {
        let cfg = SaConfig { max_outer: outer, max_inner: inner, ..SaConfig::default() };
        let t = Instant::now();
        match solve_sa_for_set_with(&g, &[0, 8], cfg) {
            Ok((sol, sa)) => {
                let rep = validate_sa(&sol, &sa, 1e-6);
                println!(
                    "outer={outer} inner={inner}: obj={:.6} pass={} p={:?} ({:.1}s)",
                    sol.objective, rep.pass,
                    sa.p.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
                    t.elapsed().as_secs_f64()
                );
            }
            Err(e) => println!("outer={outer}: ERROR {e}"),
        }
    }
}
