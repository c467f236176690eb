//! Labels points inside oriented boxes with the k-d tree path and checks the
//! result against the brute-force box-frame test.

use std::time::Instant;

use roipcc::app::bench_scene;
use roipcc::geometry::{points_in_boxes, points_in_boxes_bruteforce};

fn main() -> roipcc::Result<()> {
    let (cloud, boxes) = bench_scene(7, 100_000, 100)?;

    let t = Instant::now();
    let indexed = points_in_boxes(&cloud, &boxes);
    let indexed_time = t.elapsed();

    let t = Instant::now();
    let brute = points_in_boxes_bruteforce(&cloud, &boxes);
    let brute_time = t.elapsed();

    assert_eq!(indexed, brute);
    let labelled: usize = indexed.iter().map(Vec::len).sum();
    println!("{} points, {} boxes, {labelled} point-box hits", cloud.len(), boxes.len());
    println!(
        "indexed {:.3} ms/box, brute force {:.3} ms/box",
        indexed_time.as_secs_f64() * 1e3 / boxes.len() as f64,
        brute_time.as_secs_f64() * 1e3 / boxes.len() as f64
    );
    Ok(())
}
