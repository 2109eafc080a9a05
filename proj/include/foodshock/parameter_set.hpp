#pragma once

#include "foodshock/catalog.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace foodshock {

struct SparseEntry {
    std::uint32_t key = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Entries sorted by key, keys unique, no stored zeros.
using SparseRow = std::vector<SparseEntry>;

double row_get(const SparseRow& row, std::uint32_t key);
/// Inserts, overwrites, or (for value == 0) erases.
void row_set(SparseRow& row, std::uint32_t key, double value);
double row_sum(const SparseRow& row);
void row_scale(SparseRow& row, double factor);

/// Sector-indexed rows of per-process values. Used for output rates
/// (row = output sector, key = process) and input shares (row = input
/// sector, key = process).
class SectorProcessTable {
public:
    SectorProcessTable() = default;
    explicit SectorProcessTable(const Dims& dims) : dims_(dims), rows_(dims.sectors()) {}

    const Dims& dims() const { return dims_; }
    SparseRow& row(std::size_t sector) { return rows_[sector]; }
    const SparseRow& row(std::size_t sector) const { return rows_[sector]; }
    SparseRow& row(std::size_t area, std::size_t item) { return rows_[dims_.sector(area, item)]; }
    const SparseRow& row(std::size_t area, std::size_t item) const { return rows_[dims_.sector(area, item)]; }

    double get(std::size_t area, std::size_t item, std::size_t process) const;
    void set(std::size_t area, std::size_t item, std::size_t process, double value);

    /// Σ over items, indexed area * processes + process.
    std::vector<double> process_totals() const;
    std::size_t nnz() const;

    friend bool operator==(const SectorProcessTable&, const SectorProcessTable&) = default;

private:
    Dims dims_;
    std::vector<SparseRow> rows_;
};

/// Item-blocked trade shares: one importer x exporter matrix per item.
/// Row (item, importer) holds exporter-keyed shares, so trade never maps
/// one item onto another.
class SparseItemMatrix {
public:
    SparseItemMatrix() = default;
    explicit SparseItemMatrix(const Dims& dims) : dims_(dims), rows_(dims.sectors()) {}

    const Dims& dims() const { return dims_; }
    SparseRow& row(std::size_t item, std::size_t importer) { return rows_[dims_.sector(importer, item)]; }
    const SparseRow& row(std::size_t item, std::size_t importer) const { return rows_[dims_.sector(importer, item)]; }

    double get(std::size_t item, std::size_t importer, std::size_t exporter) const;
    void set(std::size_t item, std::size_t importer, std::size_t exporter, double value);

    /// Σ over importers, indexed by sector(exporter, item).
    std::vector<double> exporter_sums() const;
    /// Multiplies every entry of exporter column (item, exporter).
    void scale_exporter(std::size_t item, std::size_t exporter, double factor);
    std::size_t nnz() const;

    friend bool operator==(const SparseItemMatrix&, const SparseItemMatrix&) = default;

private:
    Dims dims_;
    std::vector<SparseRow> rows_;
};

/// One year of model parameters.
struct ParameterSet {
    int year = 0;
    Dims dims;
    SectorProcessTable alpha;   ///< output rate per unit of process input
    SectorProcessTable beta;    ///< inputless output volume
    SectorProcessTable nu;      ///< input share of (area, item) into a process
    SparseItemMatrix trade;     ///< share of exporter's for-trade volume received by importer
    std::vector<double> eta_exp;
    std::vector<double> eta_prod;
    std::vector<double> x0;

    ParameterSet() = default;
    ParameterSet(int year, const Dims& dims);

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

inline constexpr double kStochasticTolerance = 1e-9;

/// Human-readable descriptions of every violated invariant (empty if valid).
std::vector<std::string> invariant_violations(const ParameterSet& params, double tolerance = kStochasticTolerance);

/// Throws ValidationError listing the first violations.
void validate(const ParameterSet& params, double tolerance = kStochasticTolerance);

struct ThresholdReport {
    std::size_t zeroed_nu = 0;
    std::size_t zeroed_trade = 0;
    std::size_t zeroed_eta = 0;

    std::size_t total() const { return zeroed_nu + zeroed_trade + zeroed_eta; }
};

inline constexpr double kDefaultShareFloor = 1e-3;

/// Sets share entries strictly below `floor` to zero and rescales the
/// affected trade columns and input-share rows back to their prior sums.
/// Output rates and x0 are untouched. Zeroed allocation shares fall into
/// the implicit other-uses share.
ParameterSet threshold_small_shares(const ParameterSet& params, double floor = kDefaultShareFloor,
                                    ThresholdReport* report = nullptr);

} // namespace foodshock
