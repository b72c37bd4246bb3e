package videostore;

import java.util.Vector;

public class Customer {
    private String name;
    private Vector rentals = new Vector();

    public Customer(String name) {
        if (name == null) {
            throw new IllegalArgumentException("customer name is required");
        }
        this.name = name;
    }

    public String getName() {
        return name;
    }

    public void addRental(Rental rental) {
        rentals.addElement(rental);
    }

    public int rentalCount() {
        return rentals.size();
    }

    public double getTotalAmount() {
        double total = 0;
        for (int i = 0; i < rentals.size(); i++) {
            Rental each = (Rental) rentals.elementAt(i);
            total += each.determineAmount();
        }
        return total;
    }

    public int getFrequentRenterPoints() {
        int points = 0;
        for (int i = 0; i < rentals.size(); i++) {
            Rental each = (Rental) rentals.elementAt(i);
            points += each.determineFrequentRenterPoints();
        }
        return points;
    }

    public String statement() {
        StringBuffer result = new StringBuffer();
        result.append("Rental Record for ").append(getName()).append("\n");
        for (int i = 0; i < rentals.size(); i++) {
            Rental each = (Rental) rentals.elementAt(i);
            result.append("\t").append(each.getMovie().getTitle());
            result.append("\t").append(String.valueOf(each.determineAmount())).append("\n");
        }
        result.append("You owed ").append(String.valueOf(getTotalAmount())).append("\n");
        result.append("You earned ").append(String.valueOf(getFrequentRenterPoints())).append(" frequent renter points\n");
        return result.toString();
    }
}
