//! Detects RoI on one frame and carries it to later frames using ego poses.

use roipcc::roi::{propagate_mask, roi_from_boxes, RoiParams, DEFAULT_PROPAGATION_RADIUS};
use roipcc::synth::{generate_scene, SceneParams};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(2, &SceneParams { frames: 10, ..SceneParams::default() })?;
    let key = &scene.frames[0];
    let key_mask = roi_from_boxes(&key.cloud, &key.boxes, &RoiParams::default())?;
    println!("frame 0: {} RoI points (detected)", key_mask.count());

    for (t, frame) in scene.frames.iter().enumerate().skip(1) {
        let mask = propagate_mask(
            &key_mask,
            &key.cloud,
            &key.cloud.pose,
            &frame.cloud,
            &frame.cloud.pose,
            DEFAULT_PROPAGATION_RADIUS,
        )?;
        let agree = (0..mask.len()).filter(|&i| mask.get(i) == key_mask.get(i)).count();
        println!(
            "frame {t}: {} RoI points, {:.2}% agree with the key frame by point identity",
            mask.count(),
            100.0 * agree as f64 / mask.len() as f64
        );
    }
    Ok(())
}
