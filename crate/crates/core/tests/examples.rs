//! Every example must run to completion.

macro_rules! examples {
    ($($name:ident => $path:literal),* $(,)?) => {
        $(
            #[path = $path]
            mod $name;
        )*
        $(
            #[test]
            fn $name() {
                $name::run().unwrap();
            }
        )*
    };
}

examples! {
    williamson => "../examples/williamson.rs",
    one_mode_optimum => "../examples/one_mode_optimum.rs",
    sdp_oracle => "../examples/sdp_oracle.rs",
    protocol_comparison => "../examples/protocol_comparison.rs",
    phase_diagram => "../examples/phase_diagram.rs",
    multimode_crossing => "../examples/multimode_crossing.rs",
    pure_endpoint => "../examples/pure_endpoint.rs",
    fluctuation_entropy => "../examples/fluctuation_entropy.rs",
    gkp_benchmark => "../examples/gkp_benchmark.rs",
    experimental_overlay => "../examples/experimental_overlay.rs",
    verify_report => "../examples/verify_report.rs",
}
