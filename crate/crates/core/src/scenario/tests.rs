use super::*;

fn energy_json(family: &str, n: usize) -> String {
    format!(
        r#"{{
  "version": 1,
  "mesh": {{ "kind": "generated", "family": "{family}", "n": {n}, "seed": 3 }},
  "k": 1,
  "boundary": "dirichletTopBottomNeumannSides",
  "data": {{ "name": "energy" }},
  "stepping": {{ "scheme": "theta", "theta": 0.5, "tau": 0.05, "T": 0.2 }},
  "output": {{ "stride": 2 }}
}}"#
    )
}

#[test]
fn parses_and_defaults() {
    let cfg = ScenarioConfig::from_json(&energy_json("quad", 4)).unwrap();
    assert_eq!(cfg.boundary_rule(), BoundaryRule::DirichletTopBottomNeumannSides);
    assert_eq!(cfg.material.c, 1.0);
    assert!(cfg.output.vtk);
    assert_eq!(cfg.output_dir(None), PathBuf::from("out"));
    assert_eq!(cfg.output_dir(Some(Path::new("x"))), PathBuf::from("x"));
}

#[test]
fn rejects_unknown_keys_with_location() {
    let text = energy_json("quad", 4).replace("\"k\": 1", "\"k\": 1,\n  \"colour\": 2");
    let err = ScenarioConfig::from_json(&text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("colour") && msg.contains("line"), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn rejects_invalid_values() {
    for (from, to) in [("\"version\": 1", "\"version\": 7"), ("\"k\": 1", "\"k\": 5"), ("\"tau\": 0.05", "\"tau\": -1"), ("\"energy\"", "\"nosuch\"")] {
        let err = ScenarioConfig::from_json(&energy_json("quad", 4).replace(from, to)).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{from} -> {to}: {err}");
    }
    let cfg = ScenarioConfig::from_json(&energy_json("quad", 4).replace("\"n\": 4", "\"n\": 0")).unwrap();
    assert_eq!(Scenario::new(cfg, None).err().unwrap().exit_code(), 2);
}

#[test]
fn run_writes_a_valid_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_json(&energy_json("hexa", 3)).unwrap();
    let sc = Scenario::new(cfg, None).unwrap();
    let out = sc.run(Some(dir.path())).unwrap();
    assert_eq!(out.summary.steps, 4);
    assert!(out.summary.relative_energy_error.abs() < 1e-12);
    assert!(out.summary.manifest.iter().all(|p| p.exists()));
    let vtk: Vec<_> = out.summary.manifest.iter().filter(|p| p.extension().is_some_and(|e| e == "vtk")).collect();
    // Steps 0, 2 and 4, two files each.
    assert_eq!(vtk.len(), 6);
    for p in vtk {
        output::validate_vtk(&fs::read_to_string(p).unwrap()).unwrap();
    }
    let csv = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("step,t,energy,energy_minus_initial\n"));
}

#[test]
fn zero_data_stays_zero() {
    let text = energy_json("voro", 3).replace("\"energy\"", "\"zero\"");
    let sc = Scenario::new(ScenarioConfig::from_json(&text).unwrap(), None).unwrap();
    let out = sc.run(None).unwrap();
    assert!(out.trace.iter().all(|r| r.2 == 0.0));
    assert_eq!(out.last.p.amax(), 0.0);
}

#[test]
fn energy_study_orders_schemes() {
    let text = energy_json("tria", 4).replace("\"T\": 0.2", "\"T\": 0.5").replace("\"tau\": 0.05", "\"tau\": 0.01");
    let sc = Scenario::new(ScenarioConfig::from_json(&text).unwrap(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (d, _) = run_energy(&sc, &NamedScheme::ALL, Some(dir.path())).unwrap();
    assert!(d[0].monotone_nondecreasing && d[0].final_energy > d[0].initial_energy);
    assert!(d[1].monotone_nonincreasing && d[1].final_energy < d[1].initial_energy);
    assert!(d[2].max_drift <= 1e-12 * d[2].initial_energy);
    assert!(d[3].max_drift < 0.1 * d[3].initial_energy, "{:?}", d[3]);
    let csv = fs::read_to_string(dir.path().join("energy_symplecticEuler.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with("energy_minus_initial_x1e4"));
    assert!(dir.path().join("energy_drift.json").exists());
}

#[test]
fn energy_study_requires_unforced_data() {
    let text = energy_json("quad", 3).replace("\"energy\"", "\"manufactured\"");
    let sc = Scenario::new(ScenarioConfig::from_json(&text).unwrap(), None).unwrap();
    assert_eq!(run_energy(&sc, &NamedScheme::ALL, None).err().unwrap().exit_code(), 2);
}

#[test]
fn single_mesh_convergence_has_no_rates() {
    let text = energy_json("quad", 4).replace("\"energy\"", "\"manufactured\"").replace("\"dirichletTopBottomNeumannSides\"", "\"allDirichlet\"");
    let cfg = ScenarioConfig::from_json(&text).unwrap();
    let spec = ConvergenceSpec { families: vec![MeshFamily::Quad], n: vec![4], k: vec![1], seed: 0 };
    let v = run_convergence(&cfg, &spec).unwrap();
    assert_eq!(v[0].table.rows.len(), 1);
    assert!(v[0].pass.is_none() && v[0].eoc_u.is_none());
    let dir = tempfile::tempdir().unwrap();
    let files = write_convergence(dir.path(), &v).unwrap();
    assert!(files.iter().all(|f| f.exists()));
}

#[test]
fn diagonal_symmetry_of_symmetric_field() {
    let text = energy_json("quad", 4).replace("\"energy\"", "\"zero\"");
    let sc = Scenario::new(ScenarioConfig::from_json(&text).unwrap(), None).unwrap();
    let p = crate::space::project_scalar(&sc.disc.mesh, &sc.disc.dofs, &sc.disc.elements, &|x: &Point| x.x * x.y + x.x + x.y, 6);
    let probes = [Point::new(0.1, 0.3), Point::new(0.7, 0.2), Point::new(0.45, 0.9)];
    assert!(diagonal_symmetry_defect(&sc.disc, &p, &probes) < 1e-12);
    let q = crate::space::project_scalar(&sc.disc.mesh, &sc.disc.dofs, &sc.disc.elements, &|x: &Point| x.x, 6);
    assert!(diagonal_symmetry_defect(&sc.disc, &q, &probes) > 0.1);
}
