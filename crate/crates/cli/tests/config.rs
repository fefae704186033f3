use qndsim_cli::config::{known_keys, parse_str, serialize};
use qndsim_core::protocol::ReflectionModel;
use qndsim_core::{ExperimentConfig, InputKind, RunMode, SorterInput};

#[test]
fn empty_file_is_the_default_experiment() {
    assert_eq!(parse_str("").unwrap(), ExperimentConfig::default());
    assert_eq!(parse_str("# nothing\n\n   \n").unwrap(), ExperimentConfig::default());
}

#[test]
fn defaults_match_the_parameter_list() {
    let c = parse_str("").unwrap();
    assert_eq!((c.node1.cqed.g, c.node1.cqed.kappa, c.node1.cqed.gamma), (7.6, 2.5, 3.0));
    assert_eq!((c.node2.cqed.g, c.node2.cqed.kappa, c.node2.cqed.gamma), (7.6, 2.8, 3.0));
    assert_eq!(c.channel.transmission, 0.53);
    assert_eq!(c.detection_efficiency, 0.5);
    assert!(c.detectors.iter().all(|d| d.efficiency == 0.9 && d.dark_rate == 40.0));
    assert_eq!(c.node1.imperfections.dark_count, 0.014);
    assert_eq!(c.node2.imperfections.dark_count, 0.004);
    assert_eq!(c.node1.imperfections.t_coherence, 420.0);
    assert_eq!(c.node2.imperfections.t_coherence, 470.0);
    for n in [c.node1, c.node2] {
        assert_eq!(n.imperfections.prep_fidelity, 0.99);
        assert_eq!(n.imperfections.readout_fidelity, 0.99);
    }
}

#[test]
fn range_errors_name_the_key_and_line() {
    let e = parse_str("# header\nchannel.transmission = 1.2\n").unwrap_err();
    assert_eq!(e.line, Some(2));
    assert!(e.message.contains("channel.transmission"), "{e}");
    assert!(e.to_string().starts_with("line 2:"));
}

#[test]
fn syntax_errors_carry_line_numbers() {
    let cases = [
        ("run.seed = 1\nnot a pair\n", 2),
        ("node1.g = fast\n", 1),
        ("\n\nrun.trials = -5\n", 3),
        ("sorter.realistic = yes\n", 1),
        ("run.mode = fast\n", 1),
        ("node1.reflection =\n", 1),
        ("run.seed = 1\nrun.seed = 2\n", 2),
        ("node1.g = NaN\n", 1),
    ];
    for (text, line) in cases {
        let e = parse_str(text).unwrap_err();
        assert_eq!(e.line, Some(line), "{text:?}: {e}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let e = parse_str("run.seed = 3\nnode3.g = 1\n").unwrap_err();
    assert_eq!(e.line, Some(2));
    assert!(e.message.contains("unknown key `node3.g`"));
    assert!(parse_str("channel = 1").is_err());
}

#[test]
fn sweep_list() {
    let c = parse_str("sweep.mu = 0.04, 0.084, 0.45, 3.11").unwrap();
    assert_eq!(c.mean_photon_sweep, vec![0.04, 0.084, 0.45, 3.11]);
    assert!(parse_str("sweep.mu = 0.1, -0.2").is_err());
    assert!(parse_str("sweep.mu = 0.1,,0.2").is_err());
}

#[test]
fn truncation_infeasible_mu_is_a_config_error() {
    let e = parse_str("sweep.mu = 0.1, 9").unwrap_err();
    assert!(e.message.contains("cutoff"), "{e}");
    assert!(parse_str("table1.mu = 12").is_err());
}

#[test]
fn cross_field_validation_runs_after_parsing() {
    assert!(parse_str("node1.kappa_r = 3.0").is_err());
    // infeasible dark-count calibration
    assert!(parse_str("node2.protocol_window = 20").is_err());
    assert!(parse_str("sorter.k = 9").is_err());
}

#[test]
fn composite_keys() {
    let c = parse_str("input.kind = fock\ninput.photons = 2\n").unwrap();
    assert_eq!(c.input_kind, InputKind::Fock(2));
    let c = parse_str("input.photons = 3\ninput.kind = fock\n").unwrap();
    assert_eq!(c.input_kind, InputKind::Fock(3));
    let c = parse_str("sorter.input = coherent\nsorter.mean = 1.5\nsorter.k = 3").unwrap();
    assert_eq!(c.sorter.input, SorterInput::Coherent { mean: 1.5 });
    assert_eq!(c.sorter.k, 3);
    let c = parse_str("sorter.max_photons = 5").unwrap();
    assert_eq!(
        c.sorter.input,
        SorterInput::TruncatedCoherent {
            mean: 0.5,
            max_photons: 5
        }
    );
    let c = parse_str("sorter.input = fock\nsorter.photons = 6\nsorter.k = 3\n").unwrap();
    assert_eq!(c.sorter.input, SorterInput::Fock(6));
}

#[test]
fn round_trip() {
    let default = ExperimentConfig::default();
    assert_eq!(parse_str(&serialize(&default)).unwrap(), default);

    let text = "\
node1.reflection = ideal
node2.t_coherence = inf
node2.dark_count = 0.0123456789012345
channel.transmission = 0.1
hbt_b.dark_rate = 123.456
sweep.mu = 0.01, 0.2
input.kind = fock
input.photons = 2
run.mode = mc
run.trials = 77
run.seed = 18446744073709551615
sorter.input = coherent
sorter.mean = 0.7
sorter.realistic = true
sorter.delta_c = -1.5
";
    let c = parse_str(text).unwrap();
    assert_eq!(c.node1.reflection, ReflectionModel::Ideal);
    assert_eq!(c.mode, RunMode::MonteCarlo);
    assert_eq!(c.seed, u64::MAX);
    assert_eq!(parse_str(&serialize(&c)).unwrap(), c);
}

#[test]
fn serialization_lists_every_key_once() {
    let text = serialize(&ExperimentConfig::default());
    let mut keys: Vec<String> = text
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, _)| k.to_string()))
        .collect();
    let mut known = known_keys();
    keys.sort();
    known.sort();
    assert_eq!(keys, known);
}
