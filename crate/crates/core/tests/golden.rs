use higherk::atlas::{
    duplicate_scan, errata, find_erratum, load_golden, parse_generated_csv, regenerate,
    render_generated_csv, verify, Status, TableId, VerifyOptions,
};

#[test]
fn golden_tables_load_with_expected_row_counts() {
    let rows = load_golden().unwrap();
    for t in TableId::ALL {
        let n = rows.iter().filter(|r| r.table == t).count();
        assert_eq!(n, t.row_count(), "table {t}");
    }
}

#[test]
fn shipped_tables_verify_with_only_registered_findings() {
    let rows = load_golden().unwrap();
    let report = verify(&rows, &VerifyOptions::default());
    assert!(
        report.passed(),
        "{:?}",
        report.hard_failures().collect::<Vec<_>>()
    );
    for f in report.findings() {
        match f.status {
            Status::Registered => {
                assert!(
                    find_erratum(f.table, f.row, &f.cell).is_some() || f.cell.starts_with("twist"),
                    "{f:?}"
                )
            }
            Status::Duplicate => assert_eq!(f.table, TableId::IV),
            _ => unreachable!(),
        }
    }
    for e in errata() {
        let cell = report.cell(e.table, e.row, e.cell).unwrap();
        assert_eq!(cell.status, Status::Registered, "{e:?}");
    }
}

#[test]
fn table_iv_duplicates_are_found() {
    let rows = load_golden().unwrap();
    let mut pairs: Vec<Vec<u32>> = duplicate_scan(&rows, 11)
        .into_iter()
        .filter(|d| d.table == TableId::IV)
        .map(|d| d.rows)
        .collect();
    pairs.sort();
    assert_eq!(pairs, vec![vec![4, 19], vec![10, 11]]);
}

#[test]
fn regenerated_table_round_trips() {
    let rows = regenerate(5, &[1, 2], &VerifyOptions::default()).unwrap();
    assert_eq!(rows.len(), 12);
    let csv = render_generated_csv(&rows).unwrap();
    assert_eq!(parse_generated_csv(&csv).unwrap(), rows);
}
