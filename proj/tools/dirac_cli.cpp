// Command-line front end: direct and inverse spectral transforms for
// one-dimensional Dirac systems with matrix potentials, plus the data
// admissibility and basis diagnostics.

#include "dirac/forward.hpp"
#include "dirac/io.hpp"
#include "dirac/krein.hpp"
#include "dirac/pipeline.hpp"
#include "dirac/riesz.hpp"
#include "dirac/validator.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

std::string out_base(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return path.substr(0, path.size() - 5);
    return path;
}

struct ForwardArgs {
    std::string in, out;
    int N = 8;
    int threads = 0;
};

struct InverseArgs {
    std::string in, out;
    int terms = 0;  // 0: use the full symmetric coverage of the data
    long grid = 200;
    long acc_grid = 200;
    double p = 2;
    dirac::KreinKernel kernel = dirac::KreinKernel::standard;
    bool emit_h = false;
    int threads = 0;
    unsigned seed = 1;
};

struct RoundTripArgs {
    std::string in, out;
    int N = 16;
    int terms = 32;
    long grid = 200;
    long acc_grid = 200;
    double p = 2;
    dirac::KreinKernel kernel = dirac::KreinKernel::standard;
    bool emit_h = false;
    int threads = 0;
};

struct ValidateArgs {
    std::string in, out;
    int N = 8;
    int terms = 16;
    long acc_grid = 200;
    double p = 2;
    int threads = 0;
};

struct AccelerantArgs {
    std::string in, out;
    int terms = 0;  // 0: auto from coverage
    long acc_grid = 200;
    double p = 2;
    int threads = 0;
};

struct RieszArgs {
    std::string in, out;
    int n_min = 0;
};

int run_forward(const ForwardArgs& a) {
    dirac::PotentialGrid<double> q = dirac::io::potential_from_json(dirac::io::read_file(a.in));
    dirac::ForwardOptions<double> opt;
    opt.threads = a.threads;
    dirac::SpectralData<double> data = dirac::spectral_data(q, a.N, opt);
    dirac::io::write_file(a.out, dirac::io::to_json(data));
    std::cout << "forward: " << data.data.size() << " eigenvalues over windows |n| <= " << a.N
              << " -> " << a.out << "\n";
    return 0;
}

int run_inverse(const InverseArgs& a) {
    dirac::SpectralData<double> data = dirac::io::spectral_from_json(dirac::io::read_file(a.in));
    int cover = std::min(-data.min_window(), data.max_window());
    int terms = a.terms > 0 ? a.terms : cover;
    if (terms < 1 || terms > cover)
        throw dirac::ValidationError("inverse", "--terms must be within the data coverage |n| <= " +
                                                    std::to_string(cover));
    dirac::RankCensus<double> census = dirac::check_b2(data, terms);
    if (!census.ok)
        std::cout << "warning: rank census " << census.total << " != expected "
                  << census.expected << "\n";

    dirac::AccelerantGrid<double> h =
        dirac::build_accelerant(data, terms, a.acc_grid, a.p, a.threads);
    dirac::KreinOptions<double> kopt;
    kopt.kernel = a.kernel;
    kopt.threads = a.threads;
    dirac::KreinTriangle<double> rk = dirac::solve_krein(h, a.grid, kopt);
    dirac::PotentialGrid<double> q = dirac::potential_from_resolvent(h, rk);
    double resid = dirac::krein_residual(h, rk, 64, a.seed);

    std::string base = out_base(a.out);
    dirac::io::write_file(a.out, dirac::io::to_json(q));
    dirac::io::write_file(base + ".csv", dirac::io::to_csv(q));
    if (a.emit_h) {
        dirac::io::write_file(base + ".h.json", dirac::io::to_json(h));
        dirac::io::write_file(base + ".h.csv", dirac::io::to_csv(h));
    }
    std::cout << "inverse: terms=" << terms << " m=" << a.grid << " kernel="
              << dirac::to_string(a.kernel) << " residual=" << resid << " -> " << a.out << "\n";
    return 0;
}

int run_roundtrip(const RoundTripArgs& a) {
    dirac::PotentialGrid<double> q = dirac::io::potential_from_json(dirac::io::read_file(a.in));
    dirac::PipelineConfig<double> cfg;
    cfg.N = a.N;
    cfg.n_terms = a.terms;
    cfg.m = a.grid;
    cfg.k = a.acc_grid;
    cfg.p = a.p;
    cfg.krein.kernel = a.kernel;
    cfg.set_threads(a.threads);
    dirac::PotentialGrid<double> q2;
    dirac::AccelerantGrid<double> h;
    dirac::RoundTripReport<double> rep = dirac::roundtrip(q, cfg, &q2, &h);

    std::string base = out_base(a.out);
    dirac::io::write_file(a.out, dirac::io::to_json(rep));
    dirac::io::write_file(base + ".potential.json", dirac::io::to_json(q2));
    dirac::io::write_file(base + ".potential.csv", dirac::io::to_csv(q2));
    if (a.emit_h) {
        dirac::io::write_file(base + ".h.json", dirac::io::to_json(h));
        dirac::io::write_file(base + ".h.csv", dirac::io::to_csv(h));
    }
    std::cout << "roundtrip: potential error " << rep.potential_error << " (relative "
              << rep.relative_potential_error << "), lambda error " << rep.lambda_error
              << ", alpha error " << rep.alpha_error << " -> " << a.out << "\n";
    return 0;
}

int run_validate(const ValidateArgs& a) {
    dirac::SpectralData<double> data = dirac::io::spectral_from_json(dirac::io::read_file(a.in));
    // Census first: the remaining checks require every window to be present.
    dirac::RankCensus<double> census = dirac::check_b2(data, a.N);
    if (!census.ok) {
        std::cerr << "validation error [check_b2]: rank census " << census.total << "/"
                  << census.expected << "\n";
        return 1;
    }
    dirac::ConditionReport<double> rep =
        dirac::condition_report(data, a.N, a.terms, a.acc_grid, a.p, a.threads);
    std::string base = out_base(a.out);
    dirac::io::write_file(a.out, dirac::io::to_json(rep));
    dirac::io::write_file(base + ".tails.csv", dirac::io::tails_csv(rep));
    std::cout << "validate: rank census " << rep.b2_total << "/" << rep.b2_expected
              << ", gram " << rep.b3_min_singular << ", series tail " << rep.b4_tail << " -> "
              << a.out << "\n";
    return 0;
}

int run_accelerant(const AccelerantArgs& a) {
    dirac::SpectralData<double> data = dirac::io::spectral_from_json(dirac::io::read_file(a.in));
    int cover = std::min(-data.min_window(), data.max_window());
    int terms = a.terms > 0 ? a.terms : cover;
    dirac::AccelerantGrid<double> h =
        dirac::build_accelerant(data, terms, a.acc_grid, a.p, a.threads);
    dirac::AccelerantCheck<double> chk = dirac::is_accelerant(h);
    std::string base = out_base(a.out);
    dirac::io::write_file(a.out, dirac::io::to_json(h));
    dirac::io::write_file(base + ".csv", dirac::io::to_csv(h));
    dirac::io::write_file(base + ".check.json", dirac::io::to_json(chk));
    std::cout << "accelerant: min eigenvalue of I+H " << chk.min_eigenvalue << ", symmetry defect "
              << chk.symmetry << " -> " << a.out << "\n";
    if (!chk.accelerant) {
        std::cerr << "validation error [is_accelerant]: kernel fails the positivity test\n";
        return 1;
    }
    return 0;
}

int run_riesz(const RieszArgs& a) {
    dirac::SpectralData<double> data = dirac::io::spectral_from_json(dirac::io::read_file(a.in));
    dirac::KadecReport<double> rep = dirac::kadec_check(data, a.n_min);
    dirac::io::write_file(a.out, dirac::io::to_json(rep));
    std::cout << "riesz-check: delta " << rep.delta << ", perturbation " << rep.perturbation
              << (rep.r1_ok ? " (basis bound holds)" : " (no basis certificate)") << " -> "
              << a.out << "\n";
    if (!rep.r0_ok) {
        std::cerr << "validation error [kadec_check]: " << rep.violations.size()
                  << " window(s) fail to span\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral transforms for one-dimensional Dirac systems"};
    app.require_subcommand(1);

    const std::map<std::string, dirac::KreinKernel> kernel_names{
        {"standard", dirac::KreinKernel::standard}, {"paper", dirac::KreinKernel::paper}};

    ForwardArgs fa;
    auto* fwd = app.add_subcommand("forward", "Potential JSON in, spectral data JSON out");
    fwd->add_option("--in", fa.in, "potential grid JSON")->required();
    fwd->add_option("--out", fa.out, "spectral data JSON")->required();
    fwd->add_option("--N", fa.N, "window radius")->check(CLI::Range(1, 256));
    fwd->add_option("--threads", fa.threads, "worker cap (0: auto)")->check(CLI::Range(0, 1024));

    InverseArgs ia;
    auto* inv = app.add_subcommand("inverse", "Spectral data JSON in, potential JSON + CSV out");
    inv->add_option("--in", ia.in, "spectral data JSON")->required();
    inv->add_option("--out", ia.out, "potential JSON")->required();
    inv->add_option("--terms", ia.terms, "series truncation radius (0: data coverage)")
        ->check(CLI::Range(0, 4096));
    inv->add_option("--grid", ia.grid, "potential grid intervals m")->check(CLI::Range(8l, 100000l));
    inv->add_option("--acc-grid", ia.acc_grid, "kernel grid intervals k")
        ->check(CLI::Range(8l, 100000l));
    inv->add_option("--p", ia.p, "Lebesgue exponent")->check(CLI::Range(1.0, 64.0));
    inv->add_option("--krein-kernel", ia.kernel, "resolvent kernel variant")
        ->transform(CLI::CheckedTransformer(kernel_names, CLI::ignore_case));
    inv->add_flag("--emit-h", ia.emit_h, "also write the series kernel grid");
    inv->add_option("--threads", ia.threads, "worker cap (0: auto)")->check(CLI::Range(0, 1024));
    inv->add_option("--seed", ia.seed, "seed for the residual probes");

    RoundTripArgs ra;
    auto* rt = app.add_subcommand("roundtrip", "Potential JSON in, round-trip report out");
    rt->add_option("--in", ra.in, "potential grid JSON")->required();
    rt->add_option("--out", ra.out, "report JSON")->required();
    rt->add_option("--N", ra.N, "comparison window radius")->check(CLI::Range(1, 256));
    rt->add_option("--terms", ra.terms, "series truncation radius")->check(CLI::Range(1, 4096));
    rt->add_option("--grid", ra.grid, "potential grid intervals m")->check(CLI::Range(8l, 100000l));
    rt->add_option("--acc-grid", ra.acc_grid, "kernel grid intervals k")
        ->check(CLI::Range(8l, 100000l));
    rt->add_option("--p", ra.p, "Lebesgue exponent")->check(CLI::Range(1.0, 64.0));
    rt->add_option("--krein-kernel", ra.kernel, "resolvent kernel variant")
        ->transform(CLI::CheckedTransformer(kernel_names, CLI::ignore_case));
    rt->add_flag("--emit-h", ra.emit_h, "also write the series kernel grid");
    rt->add_option("--threads", ra.threads, "worker cap (0: auto)")->check(CLI::Range(0, 1024));

    ValidateArgs va;
    auto* val = app.add_subcommand("validate", "Admissibility report for spectral data");
    val->add_option("--in", va.in, "spectral data JSON")->required();
    val->add_option("--out", va.out, "report JSON")->required();
    val->add_option("--N", va.N, "window radius for the tail checks")->check(CLI::Range(1, 4096));
    val->add_option("--terms", va.terms, "series radius for the tail diagnostic")
        ->check(CLI::Range(2, 4096));
    val->add_option("--acc-grid", va.acc_grid, "kernel grid intervals k")
        ->check(CLI::Range(8l, 100000l));
    val->add_option("--p", va.p, "Lebesgue exponent")->check(CLI::Range(1.0, 64.0));
    val->add_option("--threads", va.threads, "worker cap (0: auto)")->check(CLI::Range(0, 1024));

    AccelerantArgs aa;
    auto* acc = app.add_subcommand("accelerant", "Series kernel grid and positivity check");
    acc->add_option("--in", aa.in, "spectral data JSON")->required();
    acc->add_option("--out", aa.out, "kernel grid JSON")->required();
    acc->add_option("--terms", aa.terms, "series truncation radius (0: data coverage)")
        ->check(CLI::Range(0, 4096));
    acc->add_option("--acc-grid", aa.acc_grid, "kernel grid intervals k")
        ->check(CLI::Range(8l, 100000l));
    acc->add_option("--p", aa.p, "Lebesgue exponent")->check(CLI::Range(1.0, 64.0));
    acc->add_option("--threads", aa.threads, "worker cap (0: auto)")->check(CLI::Range(0, 1024));

    RieszArgs za;
    auto* rz = app.add_subcommand("riesz-check", "Windowed basis stability report");
    rz->add_option("--in", za.in, "spectral data JSON")->required();
    rz->add_option("--out", za.out, "report JSON")->required();
    rz->add_option("--n-min", za.n_min, "first window radius to examine")
        ->check(CLI::Range(0, 4096));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are validation failures
    }

    try {
        if (fwd->parsed()) return run_forward(fa);
        if (inv->parsed()) return run_inverse(ia);
        if (rt->parsed()) return run_roundtrip(ra);
        if (val->parsed()) return run_validate(va);
        if (acc->parsed()) return run_accelerant(aa);
        if (rz->parsed()) return run_riesz(za);
    } catch (const dirac::ValidationError& e) {
        std::cerr << "validation error [" << e.stage() << "]: " << e.what() << "\n";
        return 1;
    } catch (const dirac::NumericError& e) {
        std::cerr << "numeric error [" << e.stage() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
