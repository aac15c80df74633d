// Serialization: JSON records, CSV tables (17 significant digits), the FRGS
// binary field sidecar, checksums, atomic writes, and a minimal structural
// schema validator for the shipped record schemas.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracgs/continuation.hpp"
#include "fracgs/extension.hpp"
#include "fracgs/ground_state.hpp"
#include "fracgs/linearized.hpp"
#include "fracgs/version.hpp"

namespace fracgs {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting and file primitives.

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// ---------------------------------------------------------------------------
// FRGS binary sidecar: 64-byte header then row-major little-endian doubles.
// Header: [0..3] "FRGS", [4..7] u32 version, [8..11] u32 N, [12..15] u32 M,
// [16..23] f64 L, [24..31] f64 s, [32..39] f64 p, [40..63] zero padding.

inline std::string encode_field_binary(const GroundState& gs) {
    std::string out(64, '\0');
    std::memcpy(&out[0], "FRGS", 4);
    const std::uint32_t version = 1, N = gs.problem.grid.dims, M = gs.problem.grid.points;
    std::memcpy(&out[4], &version, 4);
    std::memcpy(&out[8], &N, 4);
    std::memcpy(&out[12], &M, 4);
    const double L = gs.problem.grid.half_width, s = gs.problem.s, p = gs.problem.p;
    std::memcpy(&out[16], &L, 8);
    std::memcpy(&out[24], &s, 8);
    std::memcpy(&out[32], &p, 8);
    const std::size_t n = gs.u.values.size();
    out.resize(64 + 8 * n);
    std::memcpy(&out[64], gs.u.values.data(), 8 * n);
    return out;
}

struct BinaryFieldRecord {
    int dims = 0, points = 0;
    double half_width = 0, s = 0, p = 0;
    std::vector<double> values;
};

inline BinaryFieldRecord decode_field_binary(const std::string& bytes) {
    if (bytes.size() < 64 || bytes.compare(0, 4, "FRGS") != 0)
        throw std::runtime_error("not an FRGS field file");
    BinaryFieldRecord rec;
    std::uint32_t version = 0, N = 0, M = 0;
    std::memcpy(&version, &bytes[4], 4);
    std::memcpy(&N, &bytes[8], 4);
    std::memcpy(&M, &bytes[12], 4);
    if (version != 1) throw std::runtime_error("unsupported FRGS version");
    std::memcpy(&rec.half_width, &bytes[16], 8);
    std::memcpy(&rec.s, &bytes[24], 8);
    std::memcpy(&rec.p, &bytes[32], 8);
    rec.dims = static_cast<int>(N);
    rec.points = static_cast<int>(M);
    std::size_t n = 1;
    for (int d = 0; d < rec.dims; ++d) n *= rec.points;
    if (bytes.size() != 64 + 8 * n) throw std::runtime_error("FRGS payload size mismatch");
    rec.values.resize(n);
    std::memcpy(rec.values.data(), &bytes[64], 8 * n);
    return rec;
}

// ---------------------------------------------------------------------------
// JSON records.

inline json ground_state_to_json(const GroundState& gs) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["N"] = gs.problem.grid.dims;
    j["s"] = gs.problem.s;
    j["p"] = gs.problem.p;
    j["M"] = gs.problem.grid.points;
    j["L"] = gs.problem.grid.half_width;
    j["nu"] = gs.nu;
    j["residual"] = gs.residual;
    j["iterations"] = gs.iterations;
    j["lp1_norm"] = gs.lp1_norm;
    json profile = json::array();
    const RadialProfile ray = radial_ray(gs.u);
    for (std::size_t i = 0; i < ray.r.size(); ++i) profile.push_back({ray.r[i], ray.value[i]});
    j["profile"] = profile;
    return j;
}

inline json spectrum_report_to_json(const SpectrumReport& rep) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["s"] = rep.s;
    j["p"] = rep.p;
    j["N"] = rep.dims;
    json eigs = json::object();
    for (const auto& [ell, vals] : rep.sector_eigs) eigs[std::to_string(ell)] = vals;
    j["sector_eigs"] = eigs;
    j["kernel_dim"] = rep.kernel_dim;
    j["K_r"] = rep.K_r;
    j["self_pairing"] = rep.self_pairing;
    j["zero_tol"] = rep.zero_tol;
    j["degenerate"] = rep.degenerate;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

struct BranchRow {
    double s, nu_s, omega_norm, alpha, ratio, contraction_rate, fixed_point_residual, linf_gap_vs_direct;
};

inline std::string branch_to_csv(const std::vector<BranchRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("nothing to write");
    std::ostringstream out;
    out << "s,nu_s,omega_norm,alpha,ratio,contraction_rate,fixed_point_residual,linf_gap_vs_direct\n";
    for (const auto& r : rows)
        out << format_g17(r.s) << ',' << format_g17(r.nu_s) << ',' << format_g17(r.omega_norm) << ','
            << format_g17(r.alpha) << ',' << format_g17(r.ratio) << ',' << format_g17(r.contraction_rate)
            << ',' << format_g17(r.fixed_point_residual) << ',' << format_g17(r.linf_gap_vs_direct)
            << '\n';
    return out.str();
}

struct SweepRow {
    double s, nu, kr, self_pairing, residual;
    int iterations;
    double lp1_norm, linf, l2_gap_to_anchor;
};

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("nothing to write");
    std::ostringstream out;
    out << "s,nu,kr,self_pairing,residual,iterations,lp1_norm,linf,l2_gap_to_anchor\n";
    for (const auto& r : rows)
        out << format_g17(r.s) << ',' << format_g17(r.nu) << ',' << format_g17(r.kr) << ','
            << format_g17(r.self_pairing) << ',' << format_g17(r.residual) << ',' << r.iterations << ','
            << format_g17(r.lp1_norm) << ',' << format_g17(r.linf) << ','
            << format_g17(r.l2_gap_to_anchor) << '\n';
    return out.str();
}

inline json extension_diag_to_json(double s, double kappa, double max_gap, double energy,
                                   const std::vector<std::pair<double, double>>& refinement) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["s"] = s;
    j["kappa"] = kappa;
    j["max_gap"] = max_gap;
    j["energy"] = energy;
    json table = json::array();
    for (const auto& [h, gap] : refinement) table.push_back({h, gap});
    j["refinement_table"] = table;
    return j;
}

// ---------------------------------------------------------------------------
// Minimal structural schema validation (type / required / properties / items).

inline bool json_type_matches(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    return false;
}

inline void validate_against_schema(const json& value, const json& schema, const std::string& where = "$") {
    if (schema.contains("type") && !json_type_matches(value, schema["type"].get<std::string>()))
        throw std::runtime_error("schema violation at " + where + ": expected " +
                                 schema["type"].get<std::string>());
    if (schema.contains("required"))
        for (const auto& key : schema["required"]) {
            if (!value.contains(key.get<std::string>()))
                throw std::runtime_error("schema violation at " + where + ": missing " +
                                         key.get<std::string>());
        }
    if (schema.contains("properties") && value.is_object())
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key)) validate_against_schema(value[key], sub, where + "." + key);
    if (schema.contains("items") && value.is_array())
        for (const auto& item : value) validate_against_schema(item, schema["items"], where + "[]");
}

inline const char* ground_state_schema() {
    return R"({
  "type": "object",
  "required": ["schema_version", "N", "s", "p", "M", "L", "nu", "residual", "iterations", "lp1_norm", "profile"],
  "properties": {
    "schema_version": {"type": "integer"},
    "N": {"type": "integer"}, "M": {"type": "integer"}, "iterations": {"type": "integer"},
    "s": {"type": "number"}, "p": {"type": "number"}, "L": {"type": "number"},
    "nu": {"type": "number"}, "residual": {"type": "number"}, "lp1_norm": {"type": "number"},
    "profile": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
  }
})";
}

inline const char* spectrum_schema() {
    return R"({
  "type": "object",
  "required": ["schema_version", "s", "p", "N", "sector_eigs", "kernel_dim", "K_r", "self_pairing", "zero_tol"],
  "properties": {
    "schema_version": {"type": "integer"}, "N": {"type": "integer"}, "kernel_dim": {"type": "integer"},
    "s": {"type": "number"}, "p": {"type": "number"},
    "K_r": {"type": "number"}, "self_pairing": {"type": "number"}, "zero_tol": {"type": "number"},
    "sector_eigs": {"type": "object"}
  }
})";
}

inline const char* extension_schema() {
    return R"({
  "type": "object",
  "required": ["schema_version", "s", "kappa", "max_gap", "energy", "refinement_table"],
  "properties": {
    "schema_version": {"type": "integer"},
    "s": {"type": "number"}, "kappa": {"type": "number"},
    "max_gap": {"type": "number"}, "energy": {"type": "number"},
    "refinement_table": {"type": "array"}
  }
})";
}

inline const char* manifest_schema() {
    return R"({
  "type": "object",
  "required": ["schema_version", "artifact_version", "command", "config", "started_at", "finished_at", "tasks", "outputs"],
  "properties": {
    "schema_version": {"type": "integer"},
    "artifact_version": {"type": "string"},
    "command": {"type": "string"},
    "config": {"type": "object"},
    "started_at": {"type": "string"}, "finished_at": {"type": "string"},
    "tasks": {"type": "array"},
    "outputs": {"type": "array", "items": {"type": "object", "required": ["path", "bytes", "fnv1a64"]}}
  }
})";
}

// ---------------------------------------------------------------------------
// Run manifest: config echo, status, output inventory with checksums.
// Written atomically at run end; checksums cover the numeric artifacts, so
// rerunning with identical config and seed must reproduce them bit for bit.

class RunManifest {
  public:
    RunManifest(std::string command, json config)
        : command_(std::move(command)), config_(std::move(config)), started_(now_utc()) {}

    void record_task(const std::string& name, const std::string& status) {
        tasks_.push_back({{"name", name}, {"status", status}});
    }

    // writes content atomically and adds it to the inventory
    void emit(const std::string& path, const std::string& content) {
        write_file_atomic(path, content);
        outputs_.push_back({{"path", path}, {"bytes", content.size()}, {"fnv1a64", fnv1a64_hex(content)}});
    }

    json to_json() const {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["artifact_version"] = kVersion;
        j["command"] = command_;
        j["config"] = config_;
        j["started_at"] = started_;
        j["finished_at"] = now_utc();
        j["tasks"] = tasks_.empty() ? json::array() : json(tasks_);
        j["outputs"] = outputs_.empty() ? json::array() : json(outputs_);
        return j;
    }

    void write(const std::string& path) const {
        const json j = to_json();
        validate_against_schema(j, json::parse(manifest_schema()));
        write_file_atomic(path, j.dump(2) + "\n");
    }

    const json& outputs() const { return outputs_; }

  private:
    static std::string now_utc() {
        std::time_t t = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }

    std::string command_;
    json config_;
    std::string started_;
    json tasks_ = json::array();
    json outputs_ = json::array();
};

} // namespace fracgs
