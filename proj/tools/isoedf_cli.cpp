// Command-line front end: ensemble spectra, population atoms, predicted
// densities, Monte Carlo runs and model/simulation comparisons.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "isoedf/ecm.hpp"
#include "isoedf/mc.hpp"
#include "isoedf/report.hpp"
#include "isoedf/rmt.hpp"
#include "isoedf/spike.hpp"

namespace {

using namespace isoedf;
using clock_type = std::chrono::steady_clock;

struct Options {
    std::size_t n = 51;
    double zeta = 0.5;
    double c = 0.0;
    std::string mode = "reduced";
    std::size_t grid_points = 4000;
    double eta = 1e-6;
    std::size_t snapshots = 0;
    std::size_t trials = 5000;
    std::uint64_t seed = 1;
    std::size_t bins = 75;
    std::string format = "eigs";
    std::size_t repeats = 3;
    std::string out;
};

class Sink {
  public:
    explicit Sink(std::string const& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::runtime_error("cannot open " + path + " for writing");
            }
        }
        stream().precision(12);
    }

    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

MeasureKind parse_mode(std::string const& s) { return s == "full" ? MeasureKind::full : MeasureKind::reduced; }

double ms_since(clock_type::time_point t0)
{
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// L = round(n / c) when --c is given; otherwise --snapshots.
std::size_t snapshots_for(Options const& o)
{
    if (o.snapshots > 0) {
        return o.snapshots;
    }
    auto const l = static_cast<std::size_t>(std::llround(static_cast<double>(o.n) / o.c));
    if (l == 0) {
        throw ContractError("--c too large for --n: no snapshots");
    }
    return l;
}

nlohmann::ordered_json atoms_json(AtomicMeasure const& m)
{
    auto arr = nlohmann::ordered_json::array();
    for (auto const& a : m.atoms) {
        arr.push_back({a.location, a.weight});
    }
    return arr;
}

void run_eigvals(Options const& o)
{
    auto const s = ensemble_spectrum({o.n, o.zeta});
    Sink sink(o.out);
    auto& os = sink.stream();
    os << "index,gamma\n";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        os << i + 1 << ',' << s.values[i] << '\n';
    }
}

void run_atoms(Options const& o)
{
    auto const m = population_measure(ensemble_spectrum({o.n, o.zeta}), o.c, MeasureKind::reduced);
    Sink sink(o.out);
    auto& os = sink.stream();
    os << "location,weight\n";
    for (auto const& a : m.atoms) {
        os << a.location << ',' << a.weight << '\n';
    }
}

void run_predict(Options const& o)
{
    auto const pred =
        predict_edf({o.n, o.zeta}, o.c, parse_mode(o.mode), {o.grid_points, o.eta, workers_from_env()});
    nlohmann::ordered_json header{{"atoms", atoms_json(pred.measure)},
                                  {"atom_count", pred.atom_count()},
                                  {"c", o.c},
                                  {"mode", o.mode},
                                  {"eta", o.eta},
                                  {"zero_mass", pred.density.zero_mass},
                                  {"wall_ms", pred.wall_ms}};
    Sink sink(o.out);
    auto& os = sink.stream();
    os << "# " << header.dump() << '\n' << "x,f\n";
    auto const& d = pred.density;
    for (std::size_t j = 0; j < d.grid.size(); ++j) {
        os << d.grid[j] << ',' << d.values[j] << '\n';
    }
}

McConfig mc_config(Options const& o)
{
    McConfig mc;
    mc.array = {o.n, o.zeta};
    mc.snapshots = snapshots_for(o);
    mc.trials = o.trials;
    mc.seed = o.seed;
    mc.bins = o.bins;
    mc.workers = workers_from_env();
    return mc;
}

void run_simulate(Options const& o)
{
    auto const emp = run_mc(mc_config(o));
    Sink sink(o.out);
    auto& os = sink.stream();
    if (o.format == "hist") {
        os << "bin_left,bin_right,height\n";
        auto const& h = emp.histogram;
        for (std::size_t b = 0; b < h.heights.size(); ++b) {
            os << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.heights[b] << '\n';
        }
        return;
    }
    os << "trial,index,g\n";
    for (std::size_t t = 0; t < emp.per_trial.size(); ++t) {
        for (std::size_t i = 0; i < emp.per_trial[t].size(); ++i) {
            os << t << ',' << i + 1 << ',' << emp.per_trial[t][i] << '\n';
        }
    }
}

void run_compare(Options const& o)
{
    auto const mc = mc_config(o);
    double const c = mc.c();
    auto const pred =
        predict_edf(mc.array, c, parse_mode(o.mode), {o.grid_points, o.eta, workers_from_env()});
    auto const t0 = clock_type::now();
    auto const emp = run_mc(mc);
    double const mc_ms = ms_since(t0);

    auto r = compare(pred.density, emp);
    r.n = o.n;
    r.zeta = o.zeta;
    r.c = c;
    r.mode = o.mode;
    r.atom_count = pred.atom_count();
    r.runtime_model_ms = pred.wall_ms;
    r.runtime_mc_ms = mc_ms;
    r.seed = o.seed;
    Sink sink(o.out);
    sink.stream() << to_json(r).dump(2) << '\n';
}

// Times density_curve alone for both measures on the full measure's grid;
// the best of `repeats` runs is reported.
void run_bench(Options const& o)
{
    auto const spectrum = ensemble_spectrum({o.n, o.zeta});
    FmcProblem const reduced{population_measure(spectrum, o.c, MeasureKind::reduced), o.c};
    FmcProblem const full{population_measure(spectrum, o.c, MeasureKind::full), o.c};
    auto const grid = default_grid(full, o.grid_points);
    unsigned const workers = workers_from_env();
    auto best = [&](FmcProblem const& p) {
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < o.repeats; ++r) {
            auto const t0 = clock_type::now();
            auto const d = density_curve(p, grid, o.eta, workers);
            b = std::min(b, ms_since(t0));
        }
        return b;
    };
    double const reduced_ms = best(reduced);
    double const full_ms = best(full);
    nlohmann::ordered_json j{{"n", o.n},
                             {"zeta", o.zeta},
                             {"c", o.c},
                             {"grid_points", grid.size()},
                             {"eta", o.eta},
                             {"reduced_atoms", reduced.measure.size()},
                             {"full_atoms", full.measure.size()},
                             {"reduced_ms", reduced_ms},
                             {"full_ms", full_ms},
                             {"speedup", full_ms / reduced_ms}};
    Sink sink(o.out);
    sink.stream() << j.dump(2) << '\n';
}

void add_array_flags(CLI::App* cmd, Options& o)
{
    cmd->add_option("--n", o.n, "number of sensors")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    cmd->add_option("--zeta", o.zeta, "sensor spacing over wavelength")->check(CLI::PositiveNumber);
}

void add_grid_flags(CLI::App* cmd, Options& o)
{
    cmd->add_option("--grid-points", o.grid_points, "density grid size")
        ->check(CLI::Range(std::size_t{16}, std::size_t{10000000}));
    cmd->add_option("--eta", o.eta, "imaginary offset of the evaluation line")->check(CLI::PositiveNumber);
}

void add_mc_flags(CLI::App* cmd, Options& o)
{
    auto* l = cmd->add_option("--snapshots", o.snapshots, "snapshots per trial (L)")
                  ->check(CLI::PositiveNumber);
    auto* c = cmd->add_option("--c", o.c, "aspect ratio n/L; sets L = round(n/c)")->check(CLI::PositiveNumber);
    l->excludes(c);
    c->excludes(l);
    cmd->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--bins", o.bins, "histogram bins")->check(CLI::PositiveNumber);
}

CLI::Option* add_mode_flag(CLI::App* cmd, Options& o)
{
    return cmd->add_option("--mode", o.mode, "population measure")
        ->check(CLI::IsMember({"reduced", "full"}));
}

CLI::Option* add_c_flag(CLI::App* cmd, Options& o)
{
    return cmd->add_option("--c", o.c, "aspect ratio n/L")->required()->check(CLI::PositiveNumber);
}

void add_out_flag(CLI::App* cmd, Options& o) { cmd->add_option("--out", o.out, "output file (default stdout)"); }

} // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Eigenvalue distribution of array noise sample covariance matrices"};
    app.require_subcommand(1);

    auto* eigvals = app.add_subcommand("eigvals", "ensemble covariance spectrum as CSV");
    add_array_flags(eigvals, o);
    add_out_flag(eigvals, o);

    auto* atoms = app.add_subcommand("atoms", "reduced population measure as CSV");
    add_array_flags(atoms, o);
    add_c_flag(atoms, o);
    add_out_flag(atoms, o);

    auto* predict = app.add_subcommand("predict", "predicted eigenvalue density as CSV with JSON header");
    add_array_flags(predict, o);
    add_c_flag(predict, o);
    add_mode_flag(predict, o);
    add_grid_flags(predict, o);
    add_out_flag(predict, o);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sample covariance eigenvalues");
    add_array_flags(simulate, o);
    add_mc_flags(simulate, o);
    simulate->add_option("--format", o.format, "eigs or hist")->check(CLI::IsMember({"eigs", "hist"}));
    add_out_flag(simulate, o);

    auto* cmp = app.add_subcommand("compare", "model against Monte Carlo, JSON report");
    add_array_flags(cmp, o);
    add_mc_flags(cmp, o);
    add_mode_flag(cmp, o);
    add_grid_flags(cmp, o);
    add_out_flag(cmp, o);

    auto* bench = app.add_subcommand("bench", "density runtime, reduced against full measure");
    add_array_flags(bench, o);
    add_c_flag(bench, o);
    add_grid_flags(bench, o);
    bench->add_option("--repeats", o.repeats, "timing repeats")->check(CLI::PositiveNumber);
    add_out_flag(bench, o);

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return 2;
    }

    for (auto* cmd : {simulate, cmp}) {
        if (app.got_subcommand(cmd) && o.snapshots == 0 && o.c == 0.0) {
            std::cerr << cmd->get_name() << ": one of --snapshots or --c is required\n" << cmd->help();
            return 2;
        }
    }

    try {
        if (app.got_subcommand(eigvals)) {
            run_eigvals(o);
        } else if (app.got_subcommand(atoms)) {
            run_atoms(o);
        } else if (app.got_subcommand(predict)) {
            run_predict(o);
        } else if (app.got_subcommand(simulate)) {
            run_simulate(o);
        } else if (app.got_subcommand(cmp)) {
            run_compare(o);
        } else {
            run_bench(o);
        }
    } catch (NumericError const& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (std::logic_error const& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
