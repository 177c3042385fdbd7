use proptest::prelude::*;
use qrev::cli::table::{Cell, Format, Table};

fn cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        4 => prop::num::f64::NORMAL.prop_map(Cell::Num),
        1 => Just(Cell::infeasible()),
        1 => any::<bool>().prop_map(Cell::flag),
    ]
}

fn table() -> impl Strategy<Value = Table> {
    (1usize..5).prop_flat_map(|cols| {
        prop::collection::vec(prop::collection::vec(cell(), cols), 0..8).prop_map(move |rows| {
            let mut t = Table::new((0..cols).map(|i| format!("c{i}")));
            for r in rows {
                t.push(r);
            }
            t
        })
    })
}

proptest! {
    #[test]
    fn csv_roundtrip_is_exact(t in table()) {
        let text = t.encode(Format::Csv);
        prop_assert_eq!(Table::read_csv(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn json_roundtrip_is_exact(t in table()) {
        let text = t.encode(Format::Json);
        prop_assert_eq!(Table::from_json_str(&text).unwrap(), t);
    }
}
