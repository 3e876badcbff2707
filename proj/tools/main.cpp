// Command-line front end: discrete Legendre transforms, functional volume
// products, equipartition maps, and the verification suites.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mahler/equipartition.hpp"
#include "mahler/errors.hpp"
#include "mahler/function_spec.hpp"
#include "mahler/io_json.hpp"
#include "mahler/legendre.hpp"
#include "mahler/measures.hpp"
#include "mahler/verify.hpp"

using namespace mahler;

namespace {

struct RunConfig {
    std::string spec_text;
    int n = 2;
    int nodes = 513;
    double range = 0.0;       // 0 = auto from the truncation radius
    double dual_range = 0.0;  // 0 = auto
    double tol = 0.0;         // 0 = per-check defaults
    std::string suite = "smoke";
    std::uint64_t seed = 1;
    std::string out;
    std::string scale_sweep;         // "a:b:k"
    std::string regularize_schedule; // "m1,m2,..."

    void validate() const {
        if (nodes < 33 || nodes % 2 == 0)
            throw SpecParseError("nodes must be odd and >= 33");
        if (tol < 0.0) throw SpecParseError("tolerances must be > 0");
    }
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("spec")) cfg.spec_text = j["spec"].get<std::string>();
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("nodes")) cfg.nodes = j["nodes"].get<int>();
    if (j.contains("range")) cfg.range = j["range"].get<double>();
    if (j.contains("dual_range")) cfg.dual_range = j["dual_range"].get<double>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("suite")) cfg.suite = j["suite"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("scale_sweep")) cfg.scale_sweep = j["scale_sweep"].get<std::string>();
    if (j.contains("regularize_schedule"))
        cfg.regularize_schedule = j["regularize_schedule"].get<std::string>();
}

// stdout plus optional file sink for JSON lines
class Emitter {
  public:
    explicit Emitter(const std::string& out_path) {
        if (!out_path.empty()) file_.open(out_path + ".jsonl");
        JsonWriter meta;
        meta.field("record", std::string("meta"))
            .field("timestamp", static_cast<double>(std::time(nullptr)));
        line(meta.str());
    }
    void line(const std::string& s) {
        std::cout << s << "\n";
        if (file_.is_open()) file_ << s << "\n";
    }

  private:
    std::ofstream file_;
};

std::vector<double> parse_schedule(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

int cmd_transform(const RunConfig& cfg) {
    FunctionSpec spec = FunctionSpec::parse(cfg.spec_text, cfg.n);
    std::vector<AxisSpec> axes =
        cfg.range > 0.0
            ? std::vector<AxisSpec>(static_cast<std::size_t>(spec.dim()), AxisSpec(cfg.range, cfg.nodes))
            : auto_axes(spec, cfg.nodes);
    GridFunction primal = sample(spec, axes);

    DualGridSpec dual_axes;
    GridFunction dual = [&]() {
        if (cfg.dual_range > 0.0) {
            dual_axes.assign(static_cast<std::size_t>(spec.dim()),
                             AxisSpec(cfg.dual_range, cfg.nodes));
            return conjugate_nd(primal, dual_axes);  // throws DualRangeError on clipping
        }
        auto [da, lf] = auto_conjugate(primal, cfg.nodes);
        dual_axes = da;
        return lf;
    }();

    double fy = fenchel_young_violation(primal, dual, 7);
    Emitter em(cfg.out);
    JsonWriter w;
    w.field("record", std::string("transform"))
        .field("spec", spec.describe())
        .field("nodes", cfg.nodes)
        .field("range", axes[0].max_abs);
    std::vector<double> dr;
    for (const auto& ax : dual_axes) dr.push_back(ax.max_abs);
    w.field_array("dual_range", dr).field("fenchel_young_violation", fy);
    em.line(w.str());
    if (!cfg.out.empty()) {
        primal.save(cfg.out + ".primal.bin");
        dual.save(cfg.out + ".dual.bin");
    }
    return 0;
}

int cmd_volume_product(const RunConfig& cfg) {
    FunctionSpec spec = FunctionSpec::parse(cfg.spec_text, cfg.n);
    Emitter em(cfg.out);
    const int n = spec.dim();
    double lower = std::pow(4.0, n);
    double upper = std::pow(6.28318530717958647692, n);

    VolumeProduct vp = volume_product(spec, cfg.nodes);
    JsonWriter w;
    w.field("record", std::string("volume_product"))
        .field("spec", spec.describe())
        .field("P", vp.value)
        .field("error_estimate", vp.abs_error)
        .field("lower_bound", lower)
        .field("upper_bound", upper)
        .field("margin_lower", vp.value - lower)
        .field("margin_upper", upper - vp.value)
        .field("exact_path", vp.exact_path);
    em.line(w.str());

    if (!cfg.scale_sweep.empty()) {
        double a = 0, b = 0;
        int k = 0;
        if (std::sscanf(cfg.scale_sweep.c_str(), "%lf:%lf:%d", &a, &b, &k) != 3 || k < 2 ||
            !(a > 0) || !(b > a))
            throw SpecParseError("scale-sweep must be a:b:k with 0<a<b, k>=2");
        bool exact = vp.exact_path;
        std::optional<TransformPair> pair;
        if (!exact) pair = make_transform_pair(spec, cfg.nodes, 1e-10, a);
        for (int i = 0; i < k; ++i) {
            double t = a + (b - a) * i / (k - 1);
            double p = exact ? volume_product(spec, cfg.nodes, VpPath::Exact, t).value
                             : volume_product_scaled(*pair, t);
            JsonWriter row;
            row.field("record", std::string("scale_sweep")).field("t", t).field("P", p);
            em.line(row.str());
        }
    }
    return 0;
}

int cmd_equipartition(const RunConfig& cfg) {
    FunctionSpec spec = FunctionSpec::parse(cfg.spec_text, cfg.n);
    Emitter em(cfg.out);
    if (!cfg.regularize_schedule.empty()) {
        double bound = 0.0;
        auto stages =
            regularize_then_equipartition(spec, parse_schedule(cfg.regularize_schedule),
                                          cfg.nodes, &bound);
        for (const auto& st : stages) {
            JsonWriter w;
            w.field("record", std::string("regularize_stage"))
                .field("m", st.m)
                .raw("report", st.report.to_json())
                .field("volume_product", st.volume_product)
                .field("map_norm", st.map_norm)
                .field("norm_bound", bound);
            em.line(w.str());
        }
        return 0;
    }
    auto [T, report] = strong_equipartition_map(spec);
    (void)T;
    JsonWriter w;
    w.field("record", std::string("equipartition"))
        .field("spec", spec.describe())
        .raw("report", report.to_json());
    em.line(w.str());
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    SuiteConfig sc;
    sc.name = cfg.suite;
    sc.seed = cfg.seed;
    if (cfg.tol > 0.0) sc.tol_scale = cfg.tol;
    auto reports = run_suite(sc);
    Emitter em(cfg.out);
    bool all_pass = true;
    for (const auto& r : reports) {
        em.line(r.to_json());
        all_pass = all_pass && r.pass;
    }
    if (!cfg.out.empty()) {
        std::ofstream csv(cfg.out + ".csv");
        csv << VerificationReport::csv_header() << "\n";
        for (const auto& r : reports) csv << r.to_csv_row() << "\n";
    }
    JsonWriter w;
    w.field("record", std::string("summary"))
        .field("suite", cfg.suite)
        .field("checks", static_cast<int>(reports.size()))
        .field("all_pass", all_pass);
    em.line(w.str());
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical convex-analysis toolkit: Legendre transforms, "
                 "functional volume products, equipartition maps"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        sub->add_option("--spec", cfg.spec_text, "function spec, e.g. \"gaussian scale=1\"");
        sub->add_option("--n", cfg.n, "dimension (1..3)");
        sub->add_option("--nodes", cfg.nodes, "grid nodes per axis (odd, >= 33)");
        sub->add_option("--range", cfg.range, "grid half-width (0 = auto)");
        sub->add_option("--dual-range", cfg.dual_range, "dual grid half-width (0 = auto)");
        sub->add_option("--tol", cfg.tol, "tolerance scale override");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out, "output path prefix");
    };

    auto* t = app.add_subcommand("transform", "sample a spec and conjugate it");
    add_common(t);
    auto* v = app.add_subcommand("volume-product", "compute P(phi) and bound margins");
    add_common(v);
    v->add_option("--scale-sweep", cfg.scale_sweep, "emit P(t phi) over a:b:k");
    auto* e = app.add_subcommand("equipartition", "find the strong equipartition map");
    add_common(e);
    e->add_option("--regularize-schedule", cfg.regularize_schedule,
                  "comma-separated Moreau parameters");
    auto* s = app.add_subcommand("verify", "run a verification suite");
    add_common(s);
    s->add_option("--suite", cfg.suite, "smoke | full | dimension3");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            RunConfig from_file;
            apply_config_file(from_file, config_path);
            // flags override file values: re-parse flags on top
            RunConfig merged = from_file;
            if (!cfg.spec_text.empty()) merged.spec_text = cfg.spec_text;
            if (cfg.n != 2) merged.n = cfg.n;
            if (cfg.nodes != 513) merged.nodes = cfg.nodes;
            if (cfg.range != 0.0) merged.range = cfg.range;
            if (cfg.dual_range != 0.0) merged.dual_range = cfg.dual_range;
            if (cfg.tol != 0.0) merged.tol = cfg.tol;
            if (cfg.suite != "smoke") merged.suite = cfg.suite;
            if (cfg.seed != 1) merged.seed = cfg.seed;
            if (!cfg.out.empty()) merged.out = cfg.out;
            if (!cfg.scale_sweep.empty()) merged.scale_sweep = cfg.scale_sweep;
            if (!cfg.regularize_schedule.empty())
                merged.regularize_schedule = cfg.regularize_schedule;
            cfg = merged;
        }
        cfg.validate();

        if (t->parsed()) return cmd_transform(cfg);
        if (v->parsed()) return cmd_volume_product(cfg);
        if (e->parsed()) return cmd_equipartition(cfg);
        if (s->parsed()) return cmd_verify(cfg);
    } catch (const SpecParseError& err) {
        std::cerr << "spec error: " << err.what() << "\n";
        return 2;
    } catch (const DualRangeError& err) {
        std::cerr << "dual range error: " << err.what()
                  << " (suggested half-width: " << fmt17(err.required_range * 1.05) << ")\n";
        return 3;
    } catch (const IntegrabilityError& err) {
        std::cerr << "integrability error: " << err.what() << "\n";
        return 4;
    } catch (const ConvergenceError& err) {
        std::cerr << "convergence error: " << err.what() << "\n";
        return 5;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 10;
    }
    return 0;
}
