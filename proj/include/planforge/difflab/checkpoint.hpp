#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "planforge/difflab/train.hpp"
#include "planforge/feature_io.hpp"

namespace planforge::difflab {

// Text checkpoint. Header lines start with '#', each tensor is a CSV block
// written at 17 significant digits so values round-trip exactly:
//
//   # planforge-difflab 1
//   # schedule T=200 linear 0.001 0.05        (or: constant 0.9)
//   # net data_dim=1 cond_dim=0 control_dim=0 hidden=64 depth=3 time_dim=16
//   # layer 0 lora=0 lora_scale=1 control=0 control_alpha=1
//   # tensor layer0.W 17 64
//   <17 CSV rows>
//   ...
struct Checkpoint {
    Denoiser net;
    int T = 200;
    ScheduleSpec schedule = LinearBeta{};
};

namespace detail {

inline std::string fmt17(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

inline std::map<std::string, std::string> keyvals(std::istringstream& in) {
    std::map<std::string, std::string> kv;
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ck) {
    std::ostringstream out;
    out << "# planforge-difflab 1\n";
    out << "# schedule T=" << ck.T << ' ';
    if (const auto* lin = std::get_if<LinearBeta>(&ck.schedule))
        out << "linear " << detail::fmt17(lin->beta_start) << ' ' << detail::fmt17(lin->beta_end) << '\n';
    else
        out << "constant " << detail::fmt17(std::get<ConstantAlpha>(ck.schedule).alpha) << '\n';
    const DenoiserConfig& c = ck.net.cfg;
    out << "# net data_dim=" << c.data_dim << " cond_dim=" << c.cond_dim << " control_dim=" << c.control_dim
        << " hidden=" << c.hidden << " depth=" << c.depth << " time_dim=" << c.time_dim << '\n';
    Denoiser net = ck.net;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& L = net.layers[l];
        out << "# layer " << l << " lora=" << L.lora << " lora_scale=" << detail::fmt17(L.lora_scale)
            << " control=" << L.control << " control_alpha=" << detail::fmt17(L.control_alpha) << '\n';
        for (auto& t : layer_tensors(net.layers[l], nullptr, l)) {
            out << "# tensor " << t.name << ' ' << t.value->rows() << ' ' << t.value->cols() << '\n';
            out << features::format_csv(*t.value);
        }
    }
    return out.str();
}

inline Checkpoint deserialize_checkpoint(const std::string& text) {
    auto bad = [](const std::string& what) { return Error("FormatError", "checkpoint: " + what); };
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "# planforge-difflab 1") throw bad("missing header line");

    Checkpoint ck;
    bool have_net = false;
    std::map<std::string, MatrixXd> tensors;
    std::vector<std::map<std::string, std::string>> layer_flags;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string hash, kind;
        ls >> hash >> kind;
        if (hash != "#") throw bad("expected a header line, got '" + line + "'");
        if (kind == "schedule") {
            std::string tfield, family;
            ls >> tfield >> family;
            if (tfield.rfind("T=", 0) != 0) throw bad("schedule needs T=");
            ck.T = std::stoi(tfield.substr(2));
            if (family == "linear") {
                LinearBeta lin;
                ls >> lin.beta_start >> lin.beta_end;
                ck.schedule = lin;
            } else if (family == "constant") {
                ConstantAlpha ca;
                ls >> ca.alpha;
                ck.schedule = ca;
            } else {
                throw bad("unknown schedule family '" + family + "'");
            }
            if (ls.fail()) throw bad("malformed schedule line");
        } else if (kind == "net") {
            auto kv = detail::keyvals(ls);
            try {
                DenoiserConfig& c = ck.net.cfg;
                c.data_dim = std::stoi(kv.at("data_dim"));
                c.cond_dim = std::stoi(kv.at("cond_dim"));
                c.control_dim = std::stoi(kv.at("control_dim"));
                c.hidden = std::stoi(kv.at("hidden"));
                c.depth = std::stoi(kv.at("depth"));
                c.time_dim = std::stoi(kv.at("time_dim"));
            } catch (const std::exception&) {
                throw bad("malformed net line");
            }
            validate(ck.net.cfg);
            have_net = true;
        } else if (kind == "layer") {
            std::size_t index = 0;
            ls >> index;
            if (ls.fail() || index != layer_flags.size()) throw bad("layers out of order");
            layer_flags.push_back(detail::keyvals(ls));
        } else if (kind == "tensor") {
            std::string name;
            Eigen::Index rows = 0, cols = 0;
            ls >> name >> rows >> cols;
            if (ls.fail() || rows < 0 || cols < 0) throw bad("malformed tensor line");
            std::string block;
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (!std::getline(in, line)) throw bad("tensor " + name + " is truncated");
                block += line + '\n';
            }
            MatrixXd m(0, cols);
            try {
                if (rows > 0) m = features::parse_csv(block);
            } catch (const ParseError& e) {
                throw bad("tensor " + name + ": " + e.what());
            }
            if (m.rows() != rows || m.cols() != cols) throw bad("tensor " + name + " has the wrong shape");
            tensors[name] = std::move(m);
        } else {
            throw bad("unknown header '" + kind + "'");
        }
    }
    if (!have_net) throw bad("missing net line");
    if (static_cast<int>(layer_flags.size()) != ck.net.cfg.depth) throw bad("layer count differs from depth");

    for (std::size_t l = 0; l < layer_flags.size(); ++l) {
        Layer L;
        const auto& kv = layer_flags[l];
        try {
            L.lora = kv.at("lora") == "1";
            L.lora_scale = std::stod(kv.at("lora_scale"));
            L.control = kv.at("control") == "1";
            L.control_alpha = std::stod(kv.at("control_alpha"));
        } catch (const std::exception&) {
            throw bad("malformed layer line");
        }
        if (L.control) L.Z.resize(static_cast<std::size_t>(ck.net.cfg.control_dim));
        ck.net.layers.push_back(std::move(L));
        for (auto& t : layer_tensors(ck.net.layers.back(), nullptr, l)) {
            auto it = tensors.find(t.name);
            if (it == tensors.end()) throw bad("missing tensor " + t.name);
            *t.value = std::move(it->second);
            tensors.erase(it);
        }
    }
    if (!tensors.empty()) throw bad("unexpected tensor " + tensors.begin()->first);

    int in_dim = ck.net.input_dim();
    for (std::size_t l = 0; l < ck.net.layers.size(); ++l) {
        const Layer& L = ck.net.layers[l];
        const int out_dim = l + 1 == ck.net.layers.size() ? ck.net.cfg.data_dim : ck.net.cfg.hidden;
        bool ok = L.W.rows() == in_dim && L.W.cols() == out_dim && L.b.rows() == 1 && L.b.cols() == out_dim;
        if (L.lora)
            ok = ok && L.A.rows() == in_dim && L.B.cols() == out_dim && L.A.cols() == L.B.rows() && L.A.cols() >= 1;
        for (const auto& z : L.Z) ok = ok && z.rows() == in_dim && z.cols() == out_dim;
        if (!ok) throw bad("layer " + std::to_string(l) + " tensors do not fit the net shape");
        in_dim = out_dim;
    }
    make_schedule(ck.T, ck.schedule);
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    features::detail::spit(path, serialize_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(features::detail::slurp(path));
}

// Loss trace as CSV with a header comment: "step,loss" rows.
inline std::string format_loss_trace(const std::vector<double>& trace) {
    MatrixXd m(static_cast<Eigen::Index>(trace.size()), 2);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        m(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        m(static_cast<Eigen::Index>(i), 1) = trace[i];
    }
    return "# step,loss\n" + features::format_csv(m);
}

}  // namespace planforge::difflab
