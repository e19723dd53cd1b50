#pragma once

#include <stdexcept>
#include <string>

namespace cvdoe {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or violated preconditions.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A least-squares problem whose model matrix does not have full column rank.
class RankDeficientError : public Error {
  public:
    RankDeficientError(int rank, int columns)
        : Error("model matrix is rank deficient (rank " + std::to_string(rank) + " < " +
                std::to_string(columns) + " columns)"),
          rank_(rank), columns_(columns) {}

    int rank() const { return rank_; }
    int columns() const { return columns_; }

  private:
    int rank_;
    int columns_;
};

/// Leave-one-out refit impossible because a run has leverage 1.
class LeverageError : public Error {
  public:
    explicit LeverageError(int row)
        : Error("run " + std::to_string(row) + " has leverage 1; leave-one-out refit impossible"),
          row_(row) {}

    int row() const { return row_; }

  private:
    int row_;
};

/// Every candidate size was degenerate, so no size could be selected.
class SelectionFailure : public Error {
  public:
    using Error::Error;
};

/// Coordinate descent did not converge.
class ConvergenceError : public Error {
  public:
    ConvergenceError(int lambda_index, int sweeps)
        : Error("coordinate descent did not converge at lambda index " +
                std::to_string(lambda_index) + " after " + std::to_string(sweeps) + " sweeps"),
          lambda_index_(lambda_index) {}

    int lambda_index() const { return lambda_index_; }

  private:
    int lambda_index_;
};

} // namespace cvdoe
