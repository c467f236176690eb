//! Fits a mixture to the points of one box, rasterizes its bird's-eye
//! heatmap and writes it as a 16-bit PGM.

use roipcc::geometry::{points_in_boxes, Point3};
use roipcc::roi::{binarize_heatmap, fit_gmm, rasterize_heatmap, GmmParams, GridGeometry};
use roipcc::synth::{generate_scene, SceneParams};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(3, &SceneParams { frames: 1, objects: 1, ..SceneParams::default() })?;
    let frame = &scene.frames[0];
    let bbox = &frame.boxes[0];
    let inside = &points_in_boxes(&frame.cloud, &frame.boxes)[0];
    let points: Vec<Point3> = inside.iter().map(|&i| frame.cloud.points()[i]).collect();

    let gmm = fit_gmm(&points, &GmmParams { components: 5, seed: 1, ..GmmParams::default() })?;
    println!("box at ({:.1}, {:.1}), {} points", bbox.center.x, bbox.center.y, points.len());
    for (m, c) in gmm.means.iter().zip(&gmm.covariances) {
        println!("  mean ({:6.2} {:6.2} {:5.2})  var ({:.3} {:.3} {:.3})", m.x, m.y, m.z, c[(0, 0)], c[(1, 1)], c[(2, 2)]);
    }

    let grid = GridGeometry::default();
    let heatmap = rasterize_heatmap(&[(gmm.project_xy(), bbox.class_id)], &grid, 10)?;
    let cells = binarize_heatmap(&heatmap, 0.4)?.cells.iter().filter(|&&c| c).count();
    println!("{cells} cells at or above 0.4");

    let path = std::env::temp_dir().join("roipcc_heatmap.pgm");
    heatmap.write_pgm(bbox.class_id as usize, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
