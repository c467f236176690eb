//! Turns a point-wise RoI mask into a macroblock QP map and prints the
//! central part of it (`#` = q_r, `.` = q_b).

use roipcc::codec::{build_qp_map, project, solve_indicator, PlaneConfig};
use roipcc::roi::{roi_from_boxes, RoiParams};
use roipcc::synth::{generate_scene, SceneParams};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(6, &SceneParams { frames: 1, ..SceneParams::default() })?;
    let frame = &scene.frames[0];
    let mask = roi_from_boxes(&frame.cloud, &frame.boxes, &RoiParams::default())?;
    let plane = PlaneConfig::default();
    let proj = project(&frame.cloud, &plane)?;
    let column = solve_indicator(&mask, &proj.maps, &plane)?;
    let qp = build_qp_map(&column, &plane, 20, 45)?;

    let roi_mbs = column.iter().filter(|&&b| b).count();
    println!("{} RoI points -> {roi_mbs} of {} macroblocks at QP 20", mask.count(), qp.len());
    let (c0, r0) = (qp.mb_cols / 4, qp.mb_rows / 4);
    for row in r0..qp.mb_rows - r0 {
        let line: String = (c0..qp.mb_cols - c0)
            .map(|col| if qp.get(row * qp.mb_cols + col) == 20 { '#' } else { '.' })
            .collect();
        println!("{line}");
    }
    Ok(())
}
