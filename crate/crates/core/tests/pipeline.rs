use itertools::Itertools;
use sqgt_core::io::{self, CodeFile};
use sqgt_core::{
    capacity_search, concat_construct, concat_decode, estimate_disjunct_probability,
    is_sq_disjunct, minimal_levels, naive_decode, scale_code, syndrome, CodeMatrix, DesignParams,
    MonteCarloConfig, PositiveSet, Quantizer, SearchOptions,
};

#[test]
fn scaled_code_survives_files_and_decodes_every_set() {
    let (q, eta, u) = (5u32, 2u64, 3usize);
    let code = scale_code(&CodeMatrix::identity(6).unwrap(), 4, q).unwrap();
    let code = match io::code_file_from_json(&io::to_json(&code).unwrap()).unwrap() {
        CodeFile::Plain(c) => c,
        CodeFile::Concat(_) => panic!("plain code read back as concatenated"),
    };
    let quant: Quantizer = io::from_json(
        &io::to_json(&Quantizer::equidistant(eta, minimal_levels(q, eta, u).unwrap()).unwrap())
            .unwrap(),
    )
    .unwrap();
    let params = DesignParams::new(q, quant.levels(), u).unwrap();
    assert!(is_sq_disjunct(&code, &params, &quant).unwrap().is_disjunct);

    for size in 0..=u {
        for set in (0..6).combinations(size) {
            let set = PositiveSet::new(set).unwrap();
            let y = syndrome(&code, &set, &quant).unwrap();
            let (y, _) =
                io::syndrome_from_json(&io::syndrome_to_json(&y, Some(quant.levels())).unwrap())
                    .unwrap();
            let decoded = naive_decode(&code, &y, &params, &quant).unwrap();
            assert_eq!(decoded.positives, set);
            assert!(decoded.consistent);
        }
    }
}

#[test]
fn concatenated_code_round_trips_through_json() {
    let params = DesignParams::new(9, minimal_levels(9, 2, 2).unwrap(), 2).unwrap();
    let built = concat_construct(&CodeMatrix::identity(4).unwrap(), &params, 2).unwrap();
    let CodeFile::Concat(read) = io::code_file_from_json(&io::to_json(&built).unwrap()).unwrap()
    else {
        panic!("concatenated code lost its metadata");
    };
    assert_eq!(read, built);
    let set = PositiveSet::new([2, 5]).unwrap();
    let y = syndrome(read.code(), &set, &read.quantizer()).unwrap();
    assert_eq!(concat_decode(&y, &read).unwrap().positives, set);
}

#[test]
fn csv_code_round_trip() {
    let code = CodeMatrix::from_rows(4, &[vec![0, 3, 1], vec![2, 0, 0]]).unwrap();
    assert_eq!(
        io::code_from_csv(&io::code_to_csv(&code).unwrap(), Some(4)).unwrap(),
        code
    );
}

#[test]
fn capacity_table_lists_each_m() {
    let opts = SearchOptions {
        grid_step: 0.05,
        ..Default::default()
    };
    let points: Vec<_> = (1..=3)
        .map(|m| capacity_search(m, 2, 2, &opts, None).unwrap())
        .collect();
    let csv = io::capacity_csv(&points).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,alpha_bits,p0,p1,partition");
    assert_eq!(lines.len(), 4);
    // more positives can only share the same single binary test more thinly
    assert!(points.windows(2).all(|w| w[1].alpha <= w[0].alpha + 1e-12));
}

#[test]
fn monte_carlo_csv_matches_report() {
    let report = estimate_disjunct_probability(&MonteCarloConfig {
        n: 12,
        subjects: 16,
        q: 3,
        eta: 1,
        u: 1,
        trials: 20,
        seed: 5,
        work_cap: 1_000,
    })
    .unwrap();
    let csv = io::monte_carlo_csv(&report).unwrap();
    let passed = csv.lines().skip(1).filter(|l| l.contains(",true,")).count();
    assert_eq!(passed as f64 / 20.0, report.fraction);
}
