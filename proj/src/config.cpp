#include "toposd/config.hpp"

#include "toposd/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace toposd {
namespace {

    [[noreturn]] void fail(const std::string &msg) { throw Error(ErrorKind::Validation, msg); }

    std::string where(const toml::node &n)
    {
        const auto &src = n.source();
        if (src.begin.line == 0)
            return "";
        return " (line " + std::to_string(src.begin.line) + ")";
    }

    // Typed access to one table; remembers the keys read so leftovers can be rejected.
    class Section {
    public:
        Section(const toml::table *t, std::string name) : t_(t), name_(std::move(name)) {}

        bool present() const { return t_ != nullptr; }
        std::string field(const std::string &k) const { return name_.empty() ? k : name_ + "." + k; }

        const toml::node *get(const std::string &k)
        {
            used_.insert(k);
            return t_ ? t_->get(k) : nullptr;
        }

        std::optional<double> number(const std::string &k)
        {
            const toml::node *n = get(k);
            if (!n)
                return std::nullopt;
            if (auto v = n->value<double>())
                return *v;
            fail(field(k) + " must be a number" + where(*n));
        }
        double number(const std::string &k, double def) { return number(k).value_or(def); }

        std::optional<int> integer(const std::string &k)
        {
            const toml::node *n = get(k);
            if (!n)
                return std::nullopt;
            if (!n->is_integer())
                fail(field(k) + " must be an integer" + where(*n));
            return static_cast<int>(*n->value<int64_t>());
        }

        std::optional<std::string> string(const std::string &k)
        {
            const toml::node *n = get(k);
            if (!n)
                return std::nullopt;
            if (auto v = n->value<std::string>())
                return *v;
            fail(field(k) + " must be a string" + where(*n));
        }

        std::optional<std::vector<double>> numbers(const std::string &k)
        {
            const toml::node *n = get(k);
            if (!n)
                return std::nullopt;
            const toml::array *a = n->as_array();
            if (!a)
                fail(field(k) + " must be an array of numbers" + where(*n));
            std::vector<double> out;
            for (const auto &e : *a) {
                auto v = e.value<double>();
                if (!v)
                    fail(field(k) + " must be an array of numbers" + where(e));
                out.push_back(*v);
            }
            return out;
        }

        std::optional<std::vector<std::string>> strings(const std::string &k)
        {
            const toml::node *n = get(k);
            if (!n)
                return std::nullopt;
            const toml::array *a = n->as_array();
            if (!a)
                fail(field(k) + " must be an array of strings" + where(*n));
            std::vector<std::string> out;
            for (const auto &e : *a) {
                auto v = e.value<std::string>();
                if (!v)
                    fail(field(k) + " must be an array of strings" + where(e));
                out.push_back(*v);
            }
            return out;
        }

        std::optional<Vec2> point(const std::string &k)
        {
            auto v = numbers(k);
            if (!v)
                return std::nullopt;
            if (v->size() != 2)
                fail(field(k) + " must hold exactly two coordinates");
            return Vec2((*v)[0], (*v)[1]);
        }

        void finish() const
        {
            if (!t_)
                return;
            for (const auto &[k, v] : *t_)
                if (!used_.count(std::string(k.str())))
                    fail("unknown key " + field(std::string(k.str())) + where(v));
        }

    private:
        const toml::table *t_;
        std::string name_;
        std::set<std::string> used_;
    };

    const toml::table *subtable(const toml::table &root, const std::string &k)
    {
        const toml::node *n = root.get(k);
        if (!n)
            return nullptr;
        if (!n->is_table())
            fail(k + " must be a table" + where(*n));
        return n->as_table();
    }

    std::vector<const toml::table *> table_array(const toml::node *n, const std::string &field)
    {
        std::vector<const toml::table *> out;
        if (!n)
            return out;
        const toml::array *a = n->as_array();
        if (!a)
            fail(field + " must be an array of tables" + where(*n));
        for (const auto &e : *a) {
            if (!e.is_table())
                fail(field + " must be an array of tables" + where(e));
            out.push_back(e.as_table());
        }
        return out;
    }

    Nonlinearity nonlinearity(Section &s, const std::string &key)
    {
        const std::string name = s.string(key).value_or("zero");
        const double scale = s.number(key + "_scale", 1.0);
        try {
            return Nonlinearity::parse(name, scale);
        } catch (const Error &e) {
            fail(s.field(key) + ": " + e.what());
        }
    }

    Shape parse_shape(Section &s)
    {
        const std::string kind = s.string("shape").value_or("");
        if (kind == "disk") {
            const auto c = s.point("center");
            const auto r = s.number("radius");
            if (!c || !r)
                fail(s.field("center") + " and " + s.field("radius") + " are required for a disk");
            if (!(*r > 0.0))
                fail(s.field("radius") + " must be positive");
            return Disk{*c, *r};
        }
        if (kind == "square") {
            const auto c = s.point("center");
            const auto h = s.number("half_side");
            if (!c || !h || !(*h > 0.0))
                fail(s.field("center") + " and a positive " + s.field("half_side") + " are required for a square");
            return axis_square(*c, *h);
        }
        if (kind == "polygon") {
            const toml::node *n = s.get("vertices");
            const toml::array *a = n ? n->as_array() : nullptr;
            if (!a)
                fail(s.field("vertices") + " must be an array of [x, y] pairs");
            std::vector<Vec2> v;
            for (const auto &e : *a) {
                const toml::array *p = e.as_array();
                if (!p || p->size() != 2 || !(*p)[0].value<double>() || !(*p)[1].value<double>())
                    fail(s.field("vertices") + " must be an array of [x, y] pairs" + where(e));
                v.emplace_back(*(*p)[0].value<double>(), *(*p)[1].value<double>());
            }
            try {
                return make_polygon(std::move(v));
            } catch (const Error &e) {
                fail(s.field("vertices") + ": " + e.what());
            }
        }
        if (kind == "annulus") {
            const auto c = s.point("center");
            const auto a = s.number("r_in"), b = s.number("r_out");
            if (!c || !a || !b || !(*a >= 0.0 && *b > *a))
                fail(s.field("center") + ", " + s.field("r_in") + " < " + s.field("r_out") + " are required for an annulus");
            return Annulus{*c, *a, *b};
        }
        fail(s.field("shape") + " must be one of disk, square, polygon, annulus");
    }

    void check_eps_list(const std::vector<double> &eps, const std::string &field)
    {
        if (eps.empty())
            fail(field + " must not be empty");
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (!(eps[i] > 0.0) || !std::isfinite(eps[i]))
                fail(field + " values must be positive");
            if (i > 0 && !(eps[i] < eps[i - 1]))
                fail(field + " must be strictly decreasing");
        }
    }

    const std::set<std::string> sd_route_names{"measure", "splitting", "quotient"};
    const std::set<std::string> topo_route_names{"adjoint", "chain", "fd"};

    std::string holdall_name(HoldAll h) { return h == HoldAll::disk ? "disk" : "square"; }

    toml::array point_array(const Vec2 &p) { return toml::array{p.x(), p.y()}; }

    template <class T> toml::array to_array(const std::vector<T> &v)
    {
        toml::array a;
        for (const auto &x : v)
            a.push_back(x);
        return a;
    }

} // namespace

Region RunConfig::region() const { return Region(mesh.holdall, omega); }

FunctionalSpec RunConfig::functional_spec() const
{
    FunctionalSpec j;
    for (const auto &e : functional) {
        FunctionalSpec one = FunctionalSpec::single(e.kind, e.u_ref, e.r);
        one.terms[0].coefficient = e.coefficient;
        j.terms.push_back(one.terms[0]);
    }
    return j;
}

RunConfig RunConfig::smoke() const
{
    RunConfig c = *this;
    c.mesh.n = smoke_n.value_or(std::max(2, mesh.n / 2));
    if (smoke_eps)
        c.eps = *smoke_eps;
    if (smoke_fd_eps)
        c.fd_eps = *smoke_fd_eps;
    if (smoke_quotient_eps)
        c.quotient_eps = smoke_quotient_eps;
    return c;
}

RunConfig parse_config(const std::string &text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error &e) {
        fail("line " + std::to_string(e.source().begin.line) + ", column " + std::to_string(e.source().begin.column) +
             ": " + std::string(e.description()));
    }
    RunConfig c;
    Section top(&root, "");

    {
        Section s(subtable(root, "problem"), "problem");
        top.get("problem");
        c.problem.kind = parse_problem_kind(s.string("kind").value_or("poisson_rhs"));
        c.problem.f1 = s.number("f1", 0.0);
        c.problem.f2 = s.number("f2", 0.0);
        c.problem.g1 = nonlinearity(s, "g1");
        c.problem.g2 = nonlinearity(s, "g2");
        c.problem.beta1 = s.number("beta1", 1.0);
        c.problem.beta2 = s.number("beta2", 1.0);
        c.problem.f = s.number("f", 1.0);
        s.finish();
        c.problem.validate();
    }
    {
        Section s(subtable(root, "mesh"), "mesh");
        top.get("mesh");
        const std::string h = s.string("holdall").value_or("square");
        if (h == "square")
            c.mesh.holdall = HoldAll::square;
        else if (h == "disk")
            c.mesh.holdall = HoldAll::disk;
        else
            fail("mesh.holdall must be square or disk");
        c.mesh.n = s.integer("n").value_or(32);
        c.mesh.refinements = s.integer("refinements").value_or(0);
        if (c.mesh.n < 2)
            fail("mesh.n must be at least 2");
        if (c.mesh.refinements < 0 || c.mesh.refinements > 6)
            fail("mesh.refinements must lie in [0, 6]");
        s.finish();
    }
    {
        int k = 0;
        for (const toml::table *t : table_array(top.get("omega"), "omega")) {
            Section s(t, "omega[" + std::to_string(k++) + "]");
            c.omega.push_back(parse_shape(s));
            s.finish();
        }
        validate_region(c.region());
    }
    if (const toml::table *t = subtable(root, "seed")) {
        top.get("seed");
        Section s(t, "seed");
        const std::string kind = s.string("kind").value_or("point");
        const auto center = s.point("center");
        if (!center)
            fail("seed.center is required");
        if (kind == "point") {
            c.seed = InclusionSeed::point(*center);
        } else if (kind == "circle") {
            const auto r = s.number("radius");
            if (!r || !(*r > 0.0))
                fail("seed.radius must be positive for a circle seed");
            c.seed = InclusionSeed::circle(*center, *r);
        } else if (kind == "scaled") {
            const std::string w = s.string("omega").value_or("ball");
            if (w != "ball" && w != "square")
                fail("seed.omega must be ball or square");
            c.seed = InclusionSeed::scaled(*center, w == "ball" ? OmegaShape::ball : OmegaShape::square);
        } else {
            fail("seed.kind must be point, circle or scaled");
        }
        s.finish();
    }
    {
        Section s(subtable(root, "rate"), "rate");
        top.get("rate");
        if (auto e = s.numbers("eps"))
            c.eps = *e;
        check_eps_list(c.eps, "rate.eps");
        const std::string norm = s.string("norm").value_or("lp");
        if (norm == "lp")
            c.norm = NormSpec::Kind::lp;
        else if (norm == "w1p")
            c.norm = NormSpec::Kind::w1p;
        else
            fail("rate.norm must be lp or w1p");
        c.p = s.number("p", 2.0);
        if (!(c.p >= 1.0) || !std::isfinite(c.p))
            fail("rate.p must lie in [1, inf)");
        if (auto rc = s.string("case"))
            c.rate_case = parse_rate_case(*rc);
        c.puncture = s.number("puncture", 0.0);
        if (!(c.puncture >= 0.0))
            fail("rate.puncture must be non-negative");
        c.tolerance = s.number("tolerance", 0.15);
        if (!(c.tolerance > 0.0))
            fail("rate.tolerance must be positive");
        s.finish();
    }
    {
        Section s(subtable(root, "state_derivative"), "state_derivative");
        top.get("state_derivative");
        if (auto r = s.strings("routes"))
            c.sd_routes = *r;
        if (c.sd_routes.empty())
            fail("state_derivative.routes must not be empty");
        for (const auto &r : c.sd_routes)
            if (!sd_route_names.count(r))
                fail("state_derivative.routes: unknown route '" + r + "' (measure, splitting, quotient)");
        c.quotient_eps = s.number("eps");
        if (c.quotient_eps && !(*c.quotient_eps > 0.0))
            fail("state_derivative.eps must be positive");
        c.reference = s.string("reference").value_or("none");
        if (c.reference != "none" && c.reference != "disk_green")
            fail("state_derivative.reference must be none or disk_green");
        s.finish();
    }
    {
        Section s(subtable(root, "functional"), "functional");
        top.get("functional");
        auto term = [&](Section &t) {
            FunctionalEntry e;
            e.kind = parse_functional_kind(t.string("kind").value_or("l2_tracking"));
            e.coefficient = t.number("coefficient", 1.0);
            e.u_ref = t.number("u_ref", 0.0);
            e.r = t.number("r", 4.0);
            if (e.kind == FunctionalTerm::Kind::lr_tracking && !(e.r > 2.0))
                fail(t.field("r") + " must exceed 2 for lr_tracking");
            return e;
        };
        const auto terms = table_array(s.get("terms"), "functional.terms");
        if (!terms.empty()) {
            c.functional.clear();
            int k = 0;
            for (const toml::table *t : terms) {
                Section ts(t, "functional.terms[" + std::to_string(k++) + "]");
                c.functional.push_back(term(ts));
                ts.finish();
            }
        } else {
            c.functional = {term(s)};
        }
        if (auto r = s.strings("routes"))
            c.topo_routes = *r;
        if (c.topo_routes.empty())
            fail("functional.routes must not be empty");
        for (const auto &r : c.topo_routes)
            if (!topo_route_names.count(r))
                fail("functional.routes: unknown route '" + r + "' (adjoint, chain, fd)");
        if (auto e = s.numbers("fd_eps"))
            c.fd_eps = *e;
        check_eps_list(c.fd_eps, "functional.fd_eps");
        s.finish();
    }
    {
        Section s(subtable(root, "solver"), "solver");
        top.get("solver");
        c.numeric.solver.kind = parse_solver_kind(s.string("kind").value_or("auto"));
        c.numeric.solver.cg_tolerance = s.number("cg_tolerance", 1e-10);
        if (!(c.numeric.solver.cg_tolerance > 0.0 && c.numeric.solver.cg_tolerance < 1.0))
            fail("solver.cg_tolerance must lie in (0, 1)");
        c.numeric.solver.direct_threshold = s.integer("direct_threshold").value_or(20000);
        c.numeric.cut_depth = s.integer("cut_depth").value_or(4);
        c.numeric.curve_nodes = s.integer("curve_nodes").value_or(256);
        c.numeric.interface_nodes = s.integer("interface_nodes").value_or(512);
        c.threads = s.integer("threads").value_or(1);
        if (c.numeric.cut_depth < 0 || c.numeric.cut_depth > 6)
            fail("solver.cut_depth must lie in [0, 6]");
        if (c.numeric.curve_nodes < 4 || c.numeric.interface_nodes < 8)
            fail("solver.curve_nodes must be >= 4 and solver.interface_nodes >= 8");
        if (c.threads < 1)
            fail("solver.threads must be at least 1");
        s.finish();
    }
    if (const toml::table *t = subtable(root, "smoke")) {
        top.get("smoke");
        Section s(t, "smoke");
        c.smoke_n = s.integer("n");
        if (c.smoke_n && *c.smoke_n < 2)
            fail("smoke.n must be at least 2");
        c.smoke_eps = s.numbers("eps");
        if (c.smoke_eps)
            check_eps_list(*c.smoke_eps, "smoke.eps");
        c.smoke_fd_eps = s.numbers("fd_eps");
        if (c.smoke_fd_eps)
            check_eps_list(*c.smoke_fd_eps, "smoke.fd_eps");
        c.smoke_quotient_eps = s.number("quotient_eps");
        s.finish();
    }
    top.finish();
    return c;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string print_config(const RunConfig &c)
{
    toml::table root;
    const ProblemSpec &p = c.problem;
    root.insert("problem", toml::table{{"kind", to_string(p.kind)},
                                       {"f1", p.f1},
                                       {"f2", p.f2},
                                       {"g1", p.g1.name()},
                                       {"g1_scale", p.g1.scale},
                                       {"g2", p.g2.name()},
                                       {"g2_scale", p.g2.scale},
                                       {"beta1", p.beta1},
                                       {"beta2", p.beta2},
                                       {"f", p.f}});
    root.insert("mesh", toml::table{{"holdall", holdall_name(c.mesh.holdall)},
                                    {"n", c.mesh.n},
                                    {"refinements", c.mesh.refinements}});
    toml::array shapes;
    for (const Shape &s : c.omega) {
        if (const auto *d = std::get_if<Disk>(&s)) {
            shapes.push_back(toml::table{{"shape", "disk"}, {"center", point_array(d->center)}, {"radius", d->radius}});
        } else if (const auto *a = std::get_if<Annulus>(&s)) {
            shapes.push_back(toml::table{
                {"shape", "annulus"}, {"center", point_array(a->center)}, {"r_in", a->r_in}, {"r_out", a->r_out}});
        } else {
            toml::array v;
            for (const Vec2 &x : std::get<Polygon>(s).vertices)
                v.push_back(point_array(x));
            shapes.push_back(toml::table{{"shape", "polygon"}, {"vertices", v}});
        }
    }
    if (!shapes.empty())
        root.insert("omega", shapes);
    if (c.seed) {
        toml::table s{{"center", point_array(c.seed->center)}};
        switch (c.seed->kind) {
        case InclusionSeed::Kind::point: s.insert("kind", "point"); break;
        case InclusionSeed::Kind::circle_curve:
            s.insert("kind", "circle");
            s.insert("radius", c.seed->radius);
            break;
        case InclusionSeed::Kind::scaled_shape:
            s.insert("kind", "scaled");
            s.insert("omega", to_string(c.seed->omega));
            break;
        }
        root.insert("seed", s);
    }
    toml::table rate{{"eps", to_array(c.eps)},
                     {"norm", c.norm == NormSpec::Kind::lp ? "lp" : "w1p"},
                     {"p", c.p},
                     {"puncture", c.puncture},
                     {"tolerance", c.tolerance}};
    if (c.rate_case)
        rate.insert("case", to_string(*c.rate_case));
    root.insert("rate", rate);
    toml::table sd{{"routes", to_array(c.sd_routes)}, {"reference", c.reference}};
    if (c.quotient_eps)
        sd.insert("eps", *c.quotient_eps);
    root.insert("state_derivative", sd);
    toml::array terms;
    for (const auto &e : c.functional)
        terms.push_back(toml::table{
            {"kind", to_string(e.kind)}, {"coefficient", e.coefficient}, {"u_ref", e.u_ref}, {"r", e.r}});
    root.insert("functional",
                toml::table{{"terms", terms}, {"routes", to_array(c.topo_routes)}, {"fd_eps", to_array(c.fd_eps)}});
    root.insert("solver", toml::table{{"kind", to_string(c.numeric.solver.kind)},
                                      {"cg_tolerance", c.numeric.solver.cg_tolerance},
                                      {"direct_threshold", static_cast<int64_t>(c.numeric.solver.direct_threshold)},
                                      {"cut_depth", c.numeric.cut_depth},
                                      {"curve_nodes", c.numeric.curve_nodes},
                                      {"interface_nodes", c.numeric.interface_nodes},
                                      {"threads", c.threads}});
    if (c.smoke_n || c.smoke_eps || c.smoke_fd_eps || c.smoke_quotient_eps) {
        toml::table s;
        if (c.smoke_n)
            s.insert("n", *c.smoke_n);
        if (c.smoke_eps)
            s.insert("eps", to_array(*c.smoke_eps));
        if (c.smoke_fd_eps)
            s.insert("fd_eps", to_array(*c.smoke_fd_eps));
        if (c.smoke_quotient_eps)
            s.insert("quotient_eps", *c.smoke_quotient_eps);
        root.insert("smoke", s);
    }
    std::ostringstream out;
    out << toml::toml_formatter(root);
    out << "\n";
    return out.str();
}

std::string sha256_hex(const std::string &bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i)
        s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return s.str();
}

std::string config_hash(const RunConfig &c) { return sha256_hex(print_config(c)); }

MeshPtr build_mesh(const MeshPolicy &policy)
{
    Mesh m = policy.holdall == HoldAll::disk ? build_unit_disk_mesh(policy.n) : build_unit_square_mesh(policy.n);
    for (int k = 0; k < policy.refinements; ++k)
        m = refine_uniform(m);
    return std::make_shared<const Mesh>(std::move(m));
}

} // namespace toposd
