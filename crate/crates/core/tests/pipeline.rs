// End-to-end runs through the public API: parameters -> rendered map ->
// codec -> recovered parameters -> transport distances.

use spherelight::hdr::{read_pfm, read_radiance_hdr, write_pfm, write_radiance_hdr};
use spherelight::metrics::metric_report;
use spherelight::projector::reconstruct_params;
use spherelight::sphere::{cost_matrix, geodesic_distance, AnchorSet};
use spherelight::transport::{exact_emd, sml, SphericalDistribution};
use spherelight::{
    generate_anchors, render_gaussian_map, GaussianMapConfig, IlluminationParams, Panorama,
    SinkhornConfig,
};

fn sparse_params(n: usize, active: &[(usize, f64)], intensity: [f64; 3]) -> IlluminationParams {
    let total: f64 = active.iter().map(|&(_, w)| w).sum();
    let mut dist = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for &(i, w) in active {
        for ch in 0..3 {
            dist[ch][i] = w / total;
        }
    }
    IlluminationParams {
        n,
        distribution: dist,
        intensity,
        ambient: [0.0; 3],
    }
}

fn max_nn_spacing(anchors: &AnchorSet) -> f64 {
    let n = anchors.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut nearest = f64::INFINITY;
        for j in 0..n {
            if i != j {
                nearest = nearest.min(geodesic_distance(anchors.get(i), anchors.get(j)));
            }
        }
        worst = worst.max(nearest);
    }
    worst
}

fn render(params: &IlluminationParams, anchors: &AnchorSet) -> Panorama {
    let cfg = GaussianMapConfig {
        angular_size: 0.0025,
        width: 256,
        height: 128,
    };
    render_gaussian_map(params, anchors, &cfg).unwrap()
}

#[test]
fn sparse_lights_survive_render_codec_and_decompose() {
    let anchors = generate_anchors(16).unwrap();
    let c = cost_matrix(&anchors);
    let params = sparse_params(16, &[(2, 0.5), (9, 0.3), (14, 0.2)], [2.0, 1.5, 1.0]);
    let map = render(&params, &anchors);

    let bytes = write_radiance_hdr(&map).unwrap();
    let decoded = read_radiance_hdr(&bytes).unwrap();
    let recovered = reconstruct_params(&decoded, &anchors, 0.05).unwrap();

    let bound = max_nn_spacing(&anchors);
    for ch in 0..3 {
        let u = SphericalDistribution::new(params.distribution[ch].clone()).unwrap();
        let v = SphericalDistribution::normalized(recovered.distribution[ch].clone()).unwrap();
        let moved = exact_emd(&u, &v, &c).unwrap().cost;
        assert!(moved <= bound, "channel {ch} drifted {moved} > {bound}");
    }
    for ch in 0..3 {
        assert!(recovered.ambient[ch].abs() <= 1e-6);
        assert!(recovered.intensity[ch] > 0.0);
    }
}

#[test]
fn entropic_distance_tracks_the_exact_optimum_on_recovered_lights() {
    let anchors = generate_anchors(16).unwrap();
    let c = cost_matrix(&anchors);
    let a = sparse_params(16, &[(1, 0.6), (11, 0.4)], [1.0, 1.0, 1.0]);
    let b = sparse_params(16, &[(4, 0.5), (7, 0.5)], [1.0, 1.0, 1.0]);
    let pa = reconstruct_params(&render(&a, &anchors), &anchors, 0.05).unwrap();
    let pb = reconstruct_params(&render(&b, &anchors), &anchors, 0.05).unwrap();

    let cfg = SinkhornConfig {
        epsilon: 1e-4,
        ..SinkhornConfig::default()
    };
    for ch in 0..3 {
        let u = SphericalDistribution::normalized(pa.distribution[ch].clone()).unwrap();
        let v = SphericalDistribution::normalized(pb.distribution[ch].clone()).unwrap();
        let exact = exact_emd(&u, &v, &c).unwrap().cost;
        let soft = sml(&u, &v, &c, &cfg).unwrap();
        assert!(
            (soft.transport_cost - exact).abs() <= 1e-3,
            "gap {} at channel {ch}",
            (soft.transport_cost - exact).abs()
        );
        let this = sml(&u, &u, &c, &cfg).unwrap();
        assert!(this.transport_cost <= 1e-6);
    }
}

#[test]
fn codecs_hold_a_rendered_map() {
    let anchors = generate_anchors(16).unwrap();
    let params = sparse_params(16, &[(3, 0.7), (12, 0.3)], [4.0, 2.0, 1.0]);
    let map = render(&params, &anchors);

    // pfm quantizes to f32 once; a second trip must be the identity
    let once = read_pfm(&write_pfm(&map).unwrap()).unwrap();
    let twice = read_pfm(&write_pfm(&once).unwrap()).unwrap();
    assert_eq!(once, twice);

    // rgbe shares one exponent per pixel: per-channel error is bounded by
    // the brightest channel, plus a floor for values below its range
    let decoded = read_radiance_hdr(&write_radiance_hdr(&map).unwrap()).unwrap();
    for row in 0..map.height() {
        for col in 0..map.width() {
            let a = map.get(row, col);
            let b = decoded.get(row, col);
            let peak = a[0].max(a[1]).max(a[2]);
            for ch in 0..3 {
                let err = (a[ch] - b[ch]).abs();
                assert!(
                    err <= peak / 256.0 * (1.0 + 1e-12) + 1e-38,
                    "({row},{col}) channel {ch}: {} vs {}",
                    a[ch],
                    b[ch]
                );
            }
        }
    }
}

#[test]
fn metric_report_separates_scale_from_structure() {
    let anchors = generate_anchors(16).unwrap();
    let params = sparse_params(16, &[(5, 1.0)], [3.0, 2.0, 1.0]);
    let map = render(&params, &anchors);

    let same = metric_report(&map, &map).unwrap();
    assert_eq!(same.rmse, 0.0);
    assert!(same.si_rmse.abs() <= 1e-12);
    // acos(dot / (|a||a|)) wobbles by ~sqrt(ulp) even on identical pixels
    assert!(same.angular_error_deg.abs() <= 1e-5);
    assert!(same.cosine_loss.abs() <= 1e-12);

    let scaled_px: Vec<[f64; 3]> = map
        .pixels()
        .iter()
        .map(|p| [2.0 * p[0], 2.0 * p[1], 2.0 * p[2]])
        .collect();
    let scaled = Panorama::new(map.width(), map.height(), scaled_px).unwrap();
    let report = metric_report(&scaled, &map).unwrap();
    assert!(report.rmse > 0.0);
    assert!(report.si_rmse <= 1e-9, "pure scale should vanish under si");
    assert!(report.angular_error_deg <= 1e-5);
}
