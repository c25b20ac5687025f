use rhostar::analyze::{
    cell_weights_overall, component_gridlines, gen_demo_data, mental_health_table, render_cell_svg, render_scatter_svg,
    weights_component, write_weights_csv, DemoKind,
};
use rhostar::Error;

#[test]
fn rendered_files_match_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let s = gen_demo_data(DemoKind::D, 120, 8).unwrap();
    let w = weights_component(&s, 2, 1).unwrap();
    let grid = component_gridlines(&s, 2, 1).unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    render_scatter_svg(&a, s.x(), s.y(), &w.values, Some(&grid)).unwrap();
    render_scatter_svg(&b, s.x(), s.y(), &w.values, Some(&grid)).unwrap();
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    assert_eq!((grid.x.len(), grid.y.len()), (2, 1));

    let csv = dir.path().join("w.csv");
    write_weights_csv(&csv, s.x(), s.y(), &w.values).unwrap();
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 120);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0] as usize, i);
        assert_eq!(r[3], w.values[i]);
    }

    let cells = cell_weights_overall(&mental_health_table().to_sample().unwrap()).unwrap();
    let svg = dir.path().join("cells.svg");
    render_cell_svg(&svg, &cells).unwrap();
    assert!(std::fs::read_to_string(&svg).unwrap().contains(">Well</text>"));
}

#[test]
fn unwritable_path_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("plot.svg");
    let err = render_scatter_svg(&path, &[0.0, 1.0], &[1.0, 0.0], &[0.5, -0.5], None).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}
