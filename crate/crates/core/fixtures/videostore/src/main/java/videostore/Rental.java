package videostore;

public class Rental {
    public static final int MAX_DAYS = 365;

    private Movie movie;
    private int daysRented;

    public Rental(Movie movie, int daysRented) {
        if (daysRented < 1 || daysRented > MAX_DAYS) {
            throw new IllegalArgumentException("days rented out of range");
        }
        if (movie == null) {
            this.movie = new RegularMovie(null);
        } else {
            this.movie = movie;
        }
        this.daysRented = daysRented;
    }

    /** A rental of an untitled regular movie. */
    public Rental(int daysRented) {
        this(new RegularMovie(null), daysRented);
    }

    public Movie getMovie() {
        return movie;
    }

    public int getDaysRented() {
        return daysRented;
    }

    public double determineAmount() {
        return movie.determineAmount(daysRented);
    }

    public int determineFrequentRenterPoints() {
        return movie.determineFrequentRenterPoints(daysRented);
    }
}
