use posetpack::chains::{equal_chain_partition, scd};

#[test]
fn four_chains_from_nine_up() {
    for n in 9..=12 {
        let t = std::time::Instant::now();
        let Ok(out) = equal_chain_partition(n, 4) else { println!("n={n} timeout"); continue };
        println!("n={n} found={} {:?}", out.is_found(), t.elapsed());
        if let Some(c) = out.found() {
            assert!(c.is_valid());
            assert!(c.sizes().iter().all(|&s| s == 4));
        }
    }
    assert!(scd(3).is_valid());
}
