macro_rules! example_test {
    ($module:ident, $file:literal) => {
        #[path = $file]
        mod $module;

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(nw_smoother, "../examples/nw_smoother.rs");
example_test!(boosting_fit, "../examples/boosting_fit.rs");
example_test!(higher_order_kernels, "../examples/higher_order_kernels.rs");
example_test!(bias_variance, "../examples/bias_variance.rs");
example_test!(bandwidth_selection, "../examples/bandwidth_selection.rs");
example_test!(mise_study, "../examples/mise_study.rs");
example_test!(table1, "../examples/table1.rs");
example_test!(figures, "../examples/figures.rs");
