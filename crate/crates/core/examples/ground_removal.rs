//! Separates ground from objects on a synthetic frame and scores the result
//! against the planted labels.

use roipcc::roi::ground_mask;
use roipcc::synth::{generate_scene, SceneParams, GROUND_LABEL};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(11, &SceneParams { frames: 1, ..SceneParams::default() })?;
    let frame = &scene.frames[0];
    let foreground = ground_mask(&frame.cloud);

    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (i, &label) in frame.labels.iter().enumerate() {
        match (label != GROUND_LABEL, foreground.get(i)) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    println!("{} points, {} foreground", frame.cloud.len(), foreground.count());
    println!("object points kept {tp}, lost {fn_}; ground points kept {fp}");
    Ok(())
}
