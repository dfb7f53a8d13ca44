use sign_stable::collision::{kernel_matrix, write_precomputed, KernelKind};
use sign_stable::simulate::{run_collision_experiment, write_csv, SimSpec};
use sign_stable::sketch::{read_sketch_file, sketch_many, write_sketch_file, SketchRecord};
use sign_stable::vector::read_vectors;
use sign_stable::{Error, Execution, SketchConfig};

const INPUT: &str = "\
# three histograms
+1 1:0.5 3:0.5
-1 2:0.25 3:0.75

+1 4:1
";

#[test]
fn sparse_text_parsing() {
    let vs = read_vectors(INPUT.as_bytes(), None).unwrap();
    assert_eq!(vs.len(), 3);
    assert_eq!(vs[0].label, "+1");
    assert_eq!(vs[1].vector.indices(), &[1, 2]);
    assert_eq!(vs[2].vector.dim(), 4);

    for (bad, line) in [("a 2:1 2:3\n", 1), ("a 3:1 2:1\n", 1), ("ok 1:1\nb 0:1\n", 2), ("a 1:x\n", 1)] {
        match read_vectors(bad.as_bytes(), None) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
            other => panic!("{bad:?} gave {other:?}"),
        }
    }
    assert!(read_vectors("a 9:1\n".as_bytes(), Some(4)).is_err());
}

#[test]
fn sketch_file_round_trip() {
    let vs = read_vectors(INPUT.as_bytes(), None).unwrap();
    let vectors: Vec<_> = vs.iter().map(|l| l.vector.clone()).collect();
    let config = SketchConfig::new(77, 1.0, 12345).unwrap();
    let sketches = sketch_many(&vectors, &config, Execution::default()).unwrap();
    let records: Vec<SketchRecord> = vs
        .iter()
        .zip(sketches)
        .map(|(l, sketch)| SketchRecord {
            label: l.label.clone(),
            sketch,
        })
        .collect();
    let mut a = Vec::new();
    write_sketch_file(&mut a, &config, &records).unwrap();
    let mut b = Vec::new();
    write_sketch_file(&mut b, &config, &records).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 25 + 3 * (4 + 2) + 10 * 3);
    let (c, back) = read_sketch_file(a.as_slice()).unwrap();
    assert_eq!(c, config);
    assert_eq!(back, records);
}

#[test]
fn kernel_export_parses_back() {
    let vs = read_vectors(INPUT.as_bytes(), None).unwrap();
    let vectors: Vec<_> = vs.iter().map(|l| l.vector.clone()).collect();
    let m = kernel_matrix(&vectors, KernelKind::Chi2, Execution::default()).unwrap();
    let labels: Vec<&str> = vs.iter().map(|l| l.label.as_str()).collect();
    let mut out = Vec::new();
    write_precomputed(&mut out, &labels, &m).unwrap();
    let text = String::from_utf8(out).unwrap();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split(' ');
        assert_eq!(fields.next(), Some(labels[i]));
        assert_eq!(fields.next(), Some(format!("0:{}", i + 1).as_str()));
        for (j, f) in fields.enumerate() {
            let (idx, val) = f.split_once(':').unwrap();
            assert_eq!(idx.parse::<usize>().unwrap(), j + 1);
            assert_eq!(val.parse::<f64>().unwrap(), m.get(i, j));
        }
    }
    // ρ_χ² of the first two rows: 2·(0.5·0.75)/(0.5+0.75) = 0.6.
    assert!((m.get(0, 1) - 0.6).abs() < 1e-15);
    assert_eq!(m.get(0, 2), 0.0);
}

#[test]
fn curve_csv_is_reproducible() {
    let spec = SimSpec {
        dim: 50,
        df: 1,
        correlations: vec![0.0, 0.5, 1.0],
        sparsity: 0.0,
        repetitions: 1000,
        alphas: vec![1.0],
        seed: 3,
    };
    let render = |exec| {
        let mut out = Vec::new();
        write_csv(&mut out, &run_collision_experiment(&spec, exec).unwrap()).unwrap();
        String::from_utf8(out).unwrap()
    };
    let a = render(Execution::Sequential);
    assert_eq!(a, render(Execution::Parallel));
    assert_eq!(a.lines().count(), 4);
    let last = a.lines().last().unwrap();
    // Dense data at correlation 1 gives identical vectors: no collisions.
    assert!(last.starts_with("1.0,1.0,1.0,1.0,0.0,0.0,0.0,0.0,0.0"), "{last}");
}
