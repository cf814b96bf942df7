//! The two transposon moves on a small pool, then the full breeding
//! operator applied to a pool of personal bests.
//!
//!     cargo run --release --example transposon_breeding

use qpso_lssvm::swarm::{
    copy_and_paste, cut_and_paste, denormalize, normalize, transposon_operator, SearchSpace,
    SwarmConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut pool = vec![vec![0.1, 0.2, 0.3], vec![0.7, 0.8, 0.9]];
    println!("start           {pool:?}");
    cut_and_paste(&mut pool, 0, 0, 0, 2);
    println!("cut 0:0 -> 0:2  {pool:?}");
    cut_and_paste(&mut pool, 0, 1, 1, 0);
    println!("cut 0:1 -> 1:0  {pool:?}");
    copy_and_paste(&mut pool, 1, 2, 0, 0);
    println!("copy 1:2 -> 0:0 {pool:?}");

    // genes live in the unit box so coordinates of different scale can swap
    let space = SearchSpace::new(vec![-4.0, 0.9], vec![6.0, 4.6])?;
    let x = [1.0, 2.75];
    let unit = normalize(&x, &space);
    println!(
        "\n{x:?} -> unit box {unit:?} -> back {:?}",
        denormalize(&unit, &space)
    );

    let epool = vec![
        vec![-3.0, 1.0],
        vec![5.0, 4.0],
        vec![0.0, 3.0],
        vec![2.0, 2.0],
    ];
    let cfg = SwarmConfig {
        jumping_rate: 0.5,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for round in 1..=3 {
        let bred = transposon_operator(&epool, &cfg, &space, &mut rng)?;
        println!("\nround {round}");
        for (before, after) in epool.iter().zip(&bred) {
            let mark = if before == after { "" } else { "  changed" };
            println!("  {before:?} -> {after:?}{mark}");
        }
    }
    Ok(())
}
