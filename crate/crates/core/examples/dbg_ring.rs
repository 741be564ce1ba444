use sdpcut::gen;
use sdpcut::sdp::{solve_arv_with, ArvConfig};
fn main() {
    let g = gen::clique_ring(4, 5);
    let cfg = ArvConfig { max_outer: 300, max_inner: 1500, ..ArvConfig::default() };
    let sol = solve_arv_with(&g, cfg).unwrap();
    println!("final obj {}", sol.objective);
}
