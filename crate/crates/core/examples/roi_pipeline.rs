//! Runs box-driven RoI detection on a synthetic frame and reports how much
//! of each object and of the ground ends up in the mask.

use roipcc::roi::{roi_from_boxes_detailed, RoiParams};
use roipcc::synth::{generate_scene, SceneParams, GROUND_LABEL};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(5, &SceneParams { frames: 1, ..SceneParams::default() })?;
    let frame = &scene.frames[0];
    let products = roi_from_boxes_detailed(&frame.cloud, &frame.boxes, &RoiParams::default())?;

    for k in 0..frame.boxes.len() {
        let ids: Vec<usize> = (0..frame.labels.len()).filter(|&i| frame.labels[i] == k as u32 + 1).collect();
        let hit = ids.iter().filter(|&&i| products.mask.get(i)).count();
        println!("object {k} (class {}): {hit}/{} points in RoI", frame.boxes[k].class_id, ids.len());
    }
    let ground: Vec<usize> = (0..frame.labels.len()).filter(|&i| frame.labels[i] == GROUND_LABEL).collect();
    let leaked = ground.iter().filter(|&&i| products.mask.get(i)).count();
    println!("ground points in RoI: {leaked}/{}", ground.len());
    println!(
        "heatmap cells set: {}, heatmap mask {}, foreground {}, final {}",
        products.grid.cells.iter().filter(|&&c| c).count(),
        products.heatmap_mask.count(),
        products.foreground.count(),
        products.mask.count()
    );
    Ok(())
}
