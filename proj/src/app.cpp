#include "toposd/app.hpp"

#include "toposd/error.hpp"
#include "toposd/functionals.hpp"
#include "toposd/kernels.hpp"
#include "toposd/rates.hpp"
#include "toposd/state_derivative.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace toposd {
namespace {

    using json = nlohmann::json;
    namespace fs = std::filesystem;

    json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

    json vec(const Vec2 &v) { return json::array({number(v.x()), number(v.y())}); }

    std::string utc_now()
    {
        const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }

    class Writer {
    public:
        explicit Writer(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

        void text(const std::string &name, const std::string &content)
        {
            std::ofstream out(fs::path(dir_) / name, std::ios::binary);
            if (!out)
                throw Error(ErrorKind::Validation, "cannot write output file " + (fs::path(dir_) / name).string());
            out << content;
            digests_[name] = sha256_hex(content);
            files_.push_back(name);
        }

        void json_file(const std::string &name, const json &j) { text(name, j.dump(2) + "\n"); }

        void field_csv(const std::string &name, const Field &f)
        {
            std::string s = "x,y,value\n";
            const Mesh &m = f.mesh();
            for (std::size_t v = 0; v < m.num_vertices(); ++v) {
                const Vec2 &x = m.vertex(static_cast<int>(v));
                s += csv_number(x.x()) + "," + csv_number(x.y()) + "," + csv_number(f.values()[v]) + "\n";
            }
            text(name, s);
        }

        void manifest(const std::string &command, const std::string &hash, bool deterministic,
                      const std::string &started)
        {
            json files = json::array();
            for (const auto &[name, digest] : digests_)
                files.push_back({{"path", name}, {"sha256", digest}});
            json j{{"artifact_version", artifact_version},
                   {"command", command},
                   {"config_hash", hash},
                   {"deterministic", deterministic},
                   {"files", files},
                   {"timestamps",
                    {{"started", deterministic ? json(nullptr) : json(started)},
                     {"finished", deterministic ? json(nullptr) : json(utc_now())}}}};
            std::ofstream out(fs::path(dir_) / "manifest.json", std::ios::binary);
            out << j.dump(2) << "\n";
            files_.push_back("manifest.json");
        }

        const std::vector<std::string> &files() const { return files_; }

    private:
        std::string dir_;
        std::map<std::string, std::string> digests_;
        std::vector<std::string> files_;
    };

    const InclusionSeed &require_seed(const RunConfig &c)
    {
        if (!c.seed)
            throw Error(ErrorKind::Validation, "seed: a [seed] table is required for this command");
        return *c.seed;
    }

    SplitField plain(const Field &f)
    {
        SplitField s;
        s.regular = f;
        return s;
    }

    // L¹ norm of a - b with graded quadrature at the singular centre of either
    double l1_difference(const Mesh &mesh, const SplitField &a, const SplitField &b, const Vec2 &center)
    {
        NormSpec ns;
        ns.kind = NormSpec::Kind::lp;
        ns.p = 1.0;
        if (a.has_singular() || b.has_singular()) {
            SingularRefinement sr;
            sr.center = center;
            sr.radius = 2.0 * mesh.max_diameter();
            ns.singular = sr;
        }
        return norm(
            mesh,
            [&](int t, const Vec3 &bc, const Vec2 &x) {
                const PointEval p = a.eval(t, bc, x), q = b.eval(t, bc, x);
                return PointEval{p.value - q.value, p.grad - q.grad};
            },
            ns);
    }

    double disk_green(const Vec2 &x, const Vec2 &y)
    {
        const double ny = y.norm();
        const double far = ny > 0.0 ? std::log(ny * (x - y / (ny * ny)).norm()) : 0.0;
        return -(std::log((x - y).norm()) - far) / (2.0 * std::numbers::pi);
    }

    json solve_cmd(const RunConfig &c, Writer &w)
    {
        const MeshPtr mesh = build_mesh(c.mesh);
        NewtonReport rep;
        const Field u = solve_state(c.problem, mesh, c.region(), c.numeric, &rep);
        w.field_csv("field.csv", u);
        json res = json::array();
        for (double r : rep.residuals)
            res.push_back(number(r));
        return {{"vertices", mesh->num_vertices()},
                {"h", mesh->max_diameter()},
                {"newton_iterations", rep.iterations},
                {"newton_residuals", res}};
    }

    json state_derivative_cmd(const RunConfig &c, Writer &w)
    {
        const MeshPtr mesh = build_mesh(c.mesh);
        const Region omega = c.region();
        const InclusionSeed &seed = require_seed(c);
        const Field state = solve_state(c.problem, mesh, omega, c.numeric);
        const bool transmission = c.problem.kind == ProblemSpec::Kind::transmission;
        std::map<std::string, SplitField> fields;
        json out{{"routes", json::object()}};
        for (const std::string &r : c.sd_routes) {
            if (r == "measure") {
                if (transmission)
                    throw Error(ErrorKind::InadmissibleRoute,
                                "the measure route has no transmission counterpart; use splitting or quotient");
                fields[r] = semilinear_U0_measure(c.problem, mesh, omega, seed, state, c.numeric).u0;
            } else if (r == "splitting") {
                StateDerivativeResult res;
                switch (c.problem.kind) {
                case ProblemSpec::Kind::poisson_rhs:
                    res = rhs_linear_U0_splitting(c.problem, mesh, omega, seed, c.numeric);
                    break;
                case ProblemSpec::Kind::semilinear:
                    res = semilinear_U0_splitting(c.problem, mesh, omega, seed, state, c.numeric);
                    break;
                case ProblemSpec::Kind::transmission:
                    res = transmission_U0(c.problem, mesh, omega, seed, state, c.numeric);
                    json dip{{"sgn", res.sgn}};
                    if (res.c_beta)
                        dip["c_beta"] = number(*res.c_beta);
                    if (res.xi)
                        dip["xi"] = vec(*res.xi);
                    if (res.grad_x0)
                        dip["grad_u_x0"] = vec(*res.grad_x0);
                    out["dipole"] = dip;
                    break;
                }
                fields[r] = res.u0;
            } else {
                if (!c.quotient_eps)
                    throw Error(ErrorKind::Validation, "state_derivative.eps is required for the quotient route");
                const Field q = differential_quotient(c.problem, mesh, omega, seed, *c.quotient_eps, c.numeric, &state);
                fields[r] = plain(q);
                const double measure = dilate(seed, *c.quotient_eps, c.mesh.holdall).measure;
                const Field u_eps = state + q * measure;
                std::vector<Vec2> frame;
                for (int i = 0; i < 9; ++i)
                    for (int j = 0; j < 9; ++j)
                        frame.emplace_back(-2.0 + 0.5 * i, -2.0 + 0.5 * j);
                const double a = transmission ? 1.0 : 2.0;
                std::string csv = "xi_x,xi_y,value,valid\n";
                for (const CorrectorSample &k : rescaled_corrector(u_eps, state, *c.quotient_eps, seed.center, a, frame))
                    csv += csv_number(k.xi.x()) + "," + csv_number(k.xi.y()) + "," + csv_number(k.value) + "," +
                           (k.valid ? "1" : "0") + "\n";
                w.text("corrector.csv", csv);
                out["corrector"] = {{"eps", *c.quotient_eps}, {"exponent", a}, {"frame", "9x9 grid on [-2,2]^2"}};
            }
            w.field_csv("u0_" + r + ".csv", fields[r].nodal());
            out["routes"][r] = {{"l1_norm", number(l1_difference(*mesh, fields[r], plain(Field::zeros(mesh)), seed.center))}};
        }
        json pair = json::object();
        for (auto a = fields.begin(); a != fields.end(); ++a)
            for (auto b = std::next(a); b != fields.end(); ++b) {
                const double d = l1_difference(*mesh, a->second, b->second, seed.center);
                const double s = std::max(out["routes"][a->first]["l1_norm"].get<double>(),
                                          out["routes"][b->first]["l1_norm"].get<double>());
                pair[a->first + "|" + b->first] = {{"l1", number(d)}, {"relative", number(s > 1e-12 ? d / s : d)}};
            }
        out["pairwise"] = pair;
        if (c.reference == "disk_green") {
            if (c.mesh.holdall != HoldAll::disk || seed.kind != InclusionSeed::Kind::point || transmission)
                throw Error(ErrorKind::Validation,
                            "state_derivative.reference = disk_green needs mesh.holdall = disk, a point seed and a "
                            "non-transmission problem");
            const KernelContext ctx = kernel_context(c.problem, omega, seed, &state);
            const double strength = ctx.sgn * ctx.contrast();
            SplitField ref;
            ref.regular = Field::zeros(mesh);
            ref.center = seed.center;
            ref.singular = [y = seed.center, strength](const Vec2 &x) {
                const Vec2 a = x - y;
                Vec2 g = a / a.squaredNorm();
                if (y.norm() > 0.0) {
                    const Vec2 b = x - y / y.squaredNorm();
                    g -= b / b.squaredNorm();
                }
                return PointEval{strength * disk_green(x, y), -strength * g / (2.0 * std::numbers::pi)};
            };
            const auto &first = fields.begin()->second;
            const double err = l1_difference(*mesh, first, ref, seed.center);
            const double scale = l1_difference(*mesh, ref, plain(Field::zeros(mesh)), seed.center);
            out["reference"] = {{"kind", "disk_green"},
                                {"route", fields.begin()->first},
                                {"relative_l1_error", number(scale > 0.0 ? err / scale : err)},
                                {"threshold", 0.05},
                                {"pass", scale > 0.0 && err / scale < 0.05}};
        }
        if (!transmission && seed.kind != InclusionSeed::Kind::circle_curve) {
            const KernelContext ctx = kernel_context(c.problem, omega, seed, &state);
            out["log_corrector_b"] = number(log_corrector_b(ctx) + 0.0);
        }
        out["sgn"] = sign_of(omega, seed);
        out["h"] = mesh->max_diameter();
        return out;
    }

    json rate_cmd(const RunConfig &c, Writer &w, int threads, const std::string &hash)
    {
        RateStudy s;
        s.case_id = c.rate_case ? to_string(*c.rate_case) : "rate";
        s.spec = c.problem;
        s.omega = c.region();
        s.seed = require_seed(c);
        s.eps = c.eps;
        s.norm = c.norm;
        s.p = c.p;
        s.puncture = c.puncture;
        s.exponent_case = c.rate_case;
        s.tolerance = c.tolerance;
        const MeshPtr mesh = build_mesh(c.mesh);
        const RateReport r = epsilon_table(s, mesh, c.numeric, threads);
        std::string csv = "eps,error\n";
        for (std::size_t k = 0; k < r.eps.size(); ++k)
            csv += csv_number(r.eps[k]) + "," + csv_number(r.errors[k]) + "\n";
        w.text("rate.csv", csv);
        json j{{"case", r.case_id},
               {"norm", r.norm == NormSpec::Kind::lp ? "lp" : "w1p"},
               {"p", r.p},
               {"puncture", r.puncture},
               {"h", r.h},
               {"route", r.route},
               {"eps", r.eps},
               {"errors", r.errors},
               {"tolerance", r.tolerance},
               {"zero_signal", r.zero_signal},
               {"flag", r.flag},
               {"slope", r.fit ? number(r.fit->slope) : json(nullptr)},
               {"residual", r.fit ? number(r.fit->residual) : json(nullptr)},
               {"exponent", r.exponent ? number(*r.exponent) : json(nullptr)},
               {"pass", r.exponent && r.fit ? json(r.pass()) : json(nullptr)},
               {"config_hash", hash}};
        w.json_file("rate.json", j);
        if (r.fit && r.fit->residual > 0.1)
            throw Error(ErrorKind::DegenerateFit,
                        "log-log residual " + csv_number(r.fit->residual) + " exceeds 0.1; table kept in rate.csv");
        return j;
    }

    json topo_cmd(const RunConfig &c)
    {
        const MeshPtr mesh = build_mesh(c.mesh);
        const Region omega = c.region();
        const InclusionSeed &seed = require_seed(c);
        const FunctionalSpec j = c.functional_spec();
        const Field state = solve_state(c.problem, mesh, omega, c.numeric);
        const bool transmission = c.problem.kind == ProblemSpec::Kind::transmission;
        TopoDerivativeReport rep;
        rep.seed = seed;
        rep.functional = j.name();
        rep.problem = c.problem.kind;
        json extra = json::object();
        for (const std::string &r : c.topo_routes) {
            if (r == "adjoint") {
                rep.routes[r] = transmission
                                    ? topo_derivative_transmission_adjoint(j, c.problem, mesh, omega, seed, state, c.numeric)
                                    : topo_derivative_semilinear(j, c.problem, mesh, omega, seed, state, c.numeric);
            } else if (r == "chain") {
                const StateDerivativeResult u0 =
                    transmission ? transmission_U0(c.problem, mesh, omega, seed, state, c.numeric)
                                 : semilinear_U0_measure(c.problem, mesh, omega, seed, state, c.numeric);
                rep.routes[r] = topo_derivative_chain(j, c.problem, state, u0.u0);
            } else {
                const FdOracle fd = fd_oracle(j, c.problem, mesh, omega, seed, c.fd_eps, c.numeric, &state);
                rep.routes[r] = fd.extrapolated;
                rep.table = fd.table;
                if (fd.table.size() >= 2)
                    extra["fd_richardson_order2"] = number(richardson(fd.table, 2.0));
            }
        }
        json routes = json::object();
        for (const auto &[k, v] : rep.routes)
            routes[k] = number(v);
        json table = json::array();
        for (const auto &[e, q] : rep.table)
            table.push_back({number(e), number(q)});
        json pair = json::object();
        for (const auto &[k, v] : rep.pairwise_rel_diff())
            pair[k] = number(v);
        json out{{"functional", rep.functional},
                 {"problem", to_string(rep.problem)},
                 {"seed", {{"kind", to_string(seed.kind)}, {"center", vec(seed.center)}}},
                 {"routes", routes},
                 {"table", table},
                 {"pairwise_rel_diff", pair},
                 {"diagnostics", extra}};
        return out;
    }

    json mesh_cmd(const RunConfig &c)
    {
        const MeshPtr mesh = build_mesh(c.mesh);
        std::size_t boundary = 0;
        for (char b : mesh->boundary_flags())
            boundary += b != 0;
        return {{"holdall", c.mesh.holdall == HoldAll::disk ? "disk" : "square"},
                {"n", c.mesh.n},
                {"refinements", c.mesh.refinements},
                {"vertices", mesh->num_vertices()},
                {"triangles", mesh->num_triangles()},
                {"boundary_vertices", boundary},
                {"h", mesh->max_diameter()},
                {"area", mesh->total_area()}};
    }

} // namespace

std::string to_string(Command c)
{
    switch (c) {
    case Command::solve: return "solve";
    case Command::state_derivative: return "state-derivative";
    case Command::rate_study: return "rate-study";
    case Command::topo_derivative: return "topo-derivative";
    case Command::mesh_info: return "mesh-info";
    }
    return "unknown";
}

Command parse_command(const std::string &s)
{
    for (Command c : {Command::solve, Command::state_derivative, Command::rate_study, Command::topo_derivative,
                      Command::mesh_info})
        if (to_string(c) == s)
            return c;
    throw Error(ErrorKind::Validation, "unknown command '" + s + "'");
}

std::string csv_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunResult run_command(Command cmd, const RunConfig &config, const RunFlags &flags)
{
    const RunConfig c = flags.smoke ? config.smoke() : config;
    const int threads = flags.deterministic ? 1 : flags.threads.value_or(c.threads);
    const std::string started = utc_now();
    RunResult result;
    result.config_hash = config_hash(c);
    Writer w(flags.out_dir);
    w.text("config.toml", print_config(c));
    auto finish = [&](const std::string &name, json body) {
        body["config_hash"] = result.config_hash;
        w.json_file(name, body);
    };
    try {
        switch (cmd) {
        case Command::solve: finish("solve.json", solve_cmd(c, w)); break;
        case Command::state_derivative: finish("comparison.json", state_derivative_cmd(c, w)); break;
        case Command::rate_study: rate_cmd(c, w, threads, result.config_hash); break;
        case Command::topo_derivative: finish("topo_derivative.json", topo_cmd(c)); break;
        case Command::mesh_info: finish("mesh.json", mesh_cmd(c)); break;
        }
    } catch (...) {
        w.manifest(to_string(cmd), result.config_hash, flags.deterministic, started);
        throw;
    }
    w.manifest(to_string(cmd), result.config_hash, flags.deterministic, started);
    result.files = w.files();
    return result;
}

} // namespace toposd
