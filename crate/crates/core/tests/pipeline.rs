use memclust::baseline::{self, KMeansConfig};
use memclust::clustering::{init_weights, Engine, TrainConfig};
use memclust::data::{self, synth_clusters, ImageSet};
use memclust::export;

#[test]
fn noiseless_clusters_reach_zero_cost() {
    // one input per cluster, so initialization already sits on every prototype
    let s = synth_clusters(3, 1, 24, 0.0, 9).unwrap();
    let cfg = TrainConfig { epochs: 1, ..Default::default() };
    let out = init_weights(&s.inputs, 3, 0, &Engine::Ideal).unwrap().train(&s.inputs, &cfg).unwrap();
    assert_eq!(out.cost_trace, vec![0.0]);
}

#[test]
fn synthetic_set_survives_idx_round_trip() {
    let s = synth_clusters(4, 10, 36, 0.1, 1).unwrap();
    let set = s.to_image_set().unwrap();
    let bytes = data::serialize_idx_images(&set).unwrap();
    let back = data::parse_idx_images(&bytes).unwrap();
    assert_eq!(back.to_bipolar(), s.inputs);
    assert_eq!(data::serialize_idx_images(&back).unwrap(), bytes);
}

#[test]
fn nms_and_kmeans_on_separated_clusters() {
    let s = synth_clusters(4, 50, 64, 0.05, 12).unwrap();
    let cfg = TrainConfig { alpha: 0.01, epochs: 40, seed: 12, shuffle: false };
    let mut model = init_weights(&s.inputs, 4, 12, &Engine::Ideal).unwrap();
    let trace = model.train(&s.inputs, &cfg).unwrap().cost_trace;
    let km = baseline::kmeans(&s.inputs, &KMeansConfig { k: 4, seed: 12, ..Default::default() }).unwrap();
    let j_km = baseline::cost_l1(&km.centroids, &s.inputs).unwrap();
    assert!(trace.last().unwrap() <= &(1.10 * j_km), "{} vs {j_km}", trace.last().unwrap());
    assert!(trace.last().unwrap() < &trace[0] || trace[0] == 0.0);
}

#[test]
fn cropped_images_export_as_pgm() {
    let pixels: Vec<u8> = (0..2 * 28 * 28).map(|i| (i % 256) as u8).collect();
    let set = ImageSet::new(28, 28, pixels).unwrap();
    let cropped = data::center_crop(&set, 20, 20).unwrap();
    let inputs = cropped.to_bipolar();
    let pgm = export::centroid_pgm(inputs[1].values(), 20, 20).unwrap();
    let (w, h, px) = export::decode_pgm(&pgm).unwrap();
    assert_eq!((w, h), (20, 20));
    for (p, u) in px.iter().zip(inputs[1].values()) {
        assert_eq!(*p, if *u > 0.0 { 255 } else { 0 });
    }
}
