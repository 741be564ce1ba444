use sdpcut::gen;
use sdpcut::sdp::{solve_sa_for_set, validate_sa};

fn main() {
    let g = gen::disjoint_cliques(2, 4);
    match solve_sa_for_set(&g, &[0, 4], 1e-6) {
        Ok((sol, sa)) => {
            let rep = validate_sa(&sol, &sa, 1e-6);
            println!("2xK4: obj={:.6} pass={} p={:?}", sol.objective, rep.pass, sa.p);
        }
        Err(e) => println!("2xK4: ERROR {e}"),
    }
}
