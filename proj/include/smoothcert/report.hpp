#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smoothcert/error.hpp"
#include "smoothcert/shiftmeter.hpp"
#include "smoothcert/smoothing.hpp"
#include "smoothcert/tensor.hpp"

namespace smoothcert {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

/// Per-sample certification CSV. Wall-clock timings are nondeterministic, so
/// by default the seconds column is zeroed and real timings go to the
/// separate timing log; outputs are then byte-identical across runs and
/// thread counts.
inline void write_certification_csv(const CertificationReport& report, const std::string& path,
                                    bool include_timings = false) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "index,label,prediction,radius,correct,seconds\n";
    for (const auto& rec : report.records) {
        os << rec.index << ',' << rec.label << ',' << rec.prediction << ','
           << detail::fmt_double(rec.abstained() ? 0.0 : rec.radius) << ','
           << (rec.correct() ? 1 : 0) << ','
           << detail::fmt_double(include_timings ? rec.seconds : 0.0) << '\n';
    }
}

inline void write_timing_log(const CertificationReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "index,seconds\n";
    for (const auto& rec : report.records) {
        os << rec.index << ',' << detail::fmt_double(rec.seconds) << '\n';
    }
}

struct CsvRecords {
    std::vector<CertificationRecord> records;
};

inline std::vector<CertificationRecord> read_certification_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw FormatError(path + ": empty CSV");
    std::vector<CertificationRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        CertificationRecord rec;
        auto next = [&](const char* name) {
            if (!std::getline(ss, field, ',')) throw FormatError(path + ": missing field " + name);
            return field;
        };
        rec.index = std::stoul(next("index"));
        rec.label = std::stoi(next("label"));
        rec.prediction = std::stoi(next("prediction"));
        rec.radius = std::stod(next("radius"));
        next("correct");
        rec.seconds = std::stod(next("seconds"));
        records.push_back(rec);
    }
    return records;
}

/// Recomputes ACR and the certified-accuracy grid from raw records.
inline CertificationReport summarize_records(std::vector<CertificationRecord> records,
                                             std::vector<double> radii = default_radius_grid()) {
    CertificationReport report;
    report.records = std::move(records);
    report.radii = std::move(radii);
    report.certified_accuracy.assign(report.radii.size(), 0.0);
    double acr = 0.0;
    for (const auto& rec : report.records) {
        if (rec.abstained() || !rec.correct()) continue;
        acr += rec.radius;
        for (std::size_t k = 0; k < report.radii.size(); ++k) {
            if (rec.radius > report.radii[k]) report.certified_accuracy[k] += 1.0;
        }
    }
    std::size_t n = report.records.size();
    report.acr = n == 0 ? 0.0 : acr / double(n);
    for (auto& v : report.certified_accuracy) v /= double(n == 0 ? 1 : n);
    return report;
}

inline void write_shift_csv(const SigmaShiftBlock& block, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "index,l2_delta,l2_denoised\n";
    for (const auto& p : block.pairs) {
        os << p.index << ',' << detail::fmt_double(p.l2_delta) << ','
           << detail::fmt_double(p.l2_denoised) << '\n';
    }
}

/// Binary PGM (P5, maxval 255); pixels affinely mapped from [-1,1] with
/// clamping.
inline void write_pgm(const Tensor& image, std::size_t side, const std::string& path) {
    if (image.size() != side * side) throw ShapeError("write_pgm: size != side*side");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "P5\n" << side << ' ' << side << "\n255\n";
    for (std::size_t i = 0; i < image.size(); ++i) {
        double v = std::round((image[i] + 1.0) * 127.5);
        unsigned char b = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
        os.write(reinterpret_cast<const char*>(&b), 1);
    }
}

}  // namespace smoothcert
