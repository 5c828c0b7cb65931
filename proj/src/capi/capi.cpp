namespace lpt {}
