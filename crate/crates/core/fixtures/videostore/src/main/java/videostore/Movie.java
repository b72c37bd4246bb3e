package videostore;

public abstract class Movie {
    private String title;

    public Movie(String title) {
        this.title = title;
    }

    public String getTitle() {
        if (title == null) {
            return "Untitled";
        }
        return title;
    }

    public double determineAmount(int daysRented) {
        return 0;
    }

    public int determineFrequentRenterPoints(int daysRented) {
        return 1;
    }
}
