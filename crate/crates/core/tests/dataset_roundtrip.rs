use medmarket::dataset::{builtin, parse_table, serialize_table, TableId};
use medmarket::Error;

#[test]
fn every_table_survives_serialize_parse() {
    for id in TableId::ALL {
        let rows = builtin(id).unwrap();
        let text = serialize_table(&rows);
        assert_eq!(parse_table(text.as_bytes(), id).unwrap(), rows, "{id}");
        assert!(!rows.is_empty());
    }
}

#[test]
fn population_share_column_is_consistent() {
    let rows = builtin(TableId::TableB).unwrap();
    for r in rows.population().unwrap() {
        assert!(
            (100.0 * r.pop65 / r.pop_total - r.pct65).abs() <= 0.01 + 1e-9,
            "{}",
            r.year
        );
    }
}

#[test]
fn the_two_65_plus_columns_agree_where_they_overlap() {
    let t3 = builtin(TableId::Table3).unwrap();
    let tb = builtin(TableId::TableB).unwrap();
    let b = tb.to_series("pop65").unwrap();
    let mut checked = 0;
    for h in t3.health_market().unwrap() {
        if let Some(v) = b.get(h.year) {
            assert!(
                (h.pop65 * 1e3 - v).abs() <= 0.5,
                "{}: {} vs {}",
                h.year,
                h.pop65,
                v
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 11);
}

#[test]
fn row_counts() {
    let expect = [
        (TableId::Table3, 12),
        (TableId::TableB, 31),
        (TableId::TableC1, 10),
        (TableId::TableC2, 15),
    ];
    for (id, n) in expect {
        assert_eq!(builtin(id).unwrap().len(), n, "{id}");
    }
}

#[test]
fn negative_value_is_rejected_with_location() {
    let text = "year,pop_total,pop65\n2011,1347.35,-1\n";
    match parse_table(text.as_bytes(), TableId::TableC1) {
        Err(Error::Parse { row, column, .. }) => {
            assert_eq!(row, 1);
            assert_eq!(column, "pop65");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_numeric_cell_is_rejected() {
    let text = "year,pop_total,pop65\n2011,abc,112.7\n";
    assert!(matches!(
        parse_table(text.as_bytes(), TableId::TableC1),
        Err(Error::Parse { .. })
    ));
}
