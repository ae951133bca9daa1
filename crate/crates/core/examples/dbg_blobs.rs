use patchpoly::*;
use std::time::Instant;

fn main() {
    let y = synth(&SynthShape::named("two_blobs", 64, 64).unwrap(), 64, 64).unwrap();
    for (k, s) in [(5usize, 4usize), (4, 4), (8, 4), (5, 8)] {
        let tri = regular_polygon_triangulation(k).unwrap();
        let t0 = Instant::now();
        let report = fit(&y, k, s, &tri, &FitConfig::default()).unwrap();
        let pred = binarize(&report.final_maps.m_o, 0.5);
        let i = iou(&y, &pred).unwrap();
        let comps = extract_contours(&pred).len();
        let iou_gates = iou(&y, &binarize(&report.final_maps.up_m, 0.5)).unwrap();
        println!(
            "k={k} s={s}: IoU {i:.4} comps {comps} gates-IoU {iou_gates:.4} ({:.2}s)",
            t0.elapsed().as_secs_f64()
        );
    }
}
